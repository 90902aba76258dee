//! Grayscale frames and binary PGM (P5) I/O.

use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};

use crate::error::{invalid, Error, Result};

/// A single-channel frame stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameGray {
    pub width: usize,
    pub height: usize,
    /// 8 or 10.
    pub bit_depth: u8,
    pub values: Vec<u16>,
}

impl FrameGray {
    pub fn new(width: usize, height: usize, bit_depth: u8, values: Vec<u16>) -> Result<Self> {
        if bit_depth != 8 && bit_depth != 10 {
            return invalid(format!("unsupported bit depth {bit_depth}"));
        }
        if width == 0 || height == 0 {
            return invalid("frame dimensions must be positive");
        }
        if values.len() != width * height {
            return invalid(format!(
                "expected {} samples for {width}x{height}, got {}",
                width * height,
                values.len()
            ));
        }
        let max = (1u32 << bit_depth) - 1;
        if let Some(v) = values.iter().find(|&&v| u32::from(v) > max) {
            return invalid(format!("sample {v} exceeds {bit_depth}-bit range"));
        }
        Ok(Self {
            width,
            height,
            bit_depth,
            values,
        })
    }

    pub fn filled(width: usize, height: usize, bit_depth: u8, value: u16) -> Result<Self> {
        Self::new(width, height, bit_depth, vec![value; width * height])
    }

    /// Builds a frame by evaluating `f(col, row)` at every pixel.
    pub fn from_fn(
        width: usize,
        height: usize,
        bit_depth: u8,
        mut f: impl FnMut(usize, usize) -> u16,
    ) -> Result<Self> {
        let mut values = Vec::with_capacity(width * height);
        for row in 0..height {
            for col in 0..width {
                values.push(f(col, row));
            }
        }
        Self::new(width, height, bit_depth, values)
    }

    pub fn max_value(&self) -> u16 {
        ((1u32 << self.bit_depth) - 1) as u16
    }

    #[inline]
    pub fn get(&self, col: usize, row: usize) -> u16 {
        self.values[row * self.width + col]
    }

    pub fn is_equirectangular(&self) -> bool {
        self.width == 2 * self.height
    }

    /// Bilinear sample at continuous pixel coordinates, where pixel `(c, r)`
    /// has its center at `(c + 0.5, r + 0.5)`. Columns wrap; rows clamp.
    pub fn sample_wrapped(&self, px: f64, py: f64) -> f64 {
        let w = self.width as isize;
        let h = self.height as isize;
        let fx = px - 0.5;
        let fy = (py - 0.5).clamp(0.0, (self.height - 1) as f64);
        let x0 = fx.floor();
        let y0 = fy.floor();
        let ax = fx - x0;
        let ay = fy - y0;
        let c0 = (x0 as isize).rem_euclid(w) as usize;
        let c1 = (x0 as isize + 1).rem_euclid(w) as usize;
        let r0 = y0 as usize;
        let r1 = ((y0 as isize + 1).min(h - 1)) as usize;
        let v00 = f64::from(self.get(c0, r0));
        let v10 = f64::from(self.get(c1, r0));
        let v01 = f64::from(self.get(c0, r1));
        let v11 = f64::from(self.get(c1, r1));
        let top = v00 + (v10 - v00) * ax;
        let bottom = v01 + (v11 - v01) * ax;
        top + (bottom - top) * ay
    }
}

/// Reads a binary PGM. Maxval ≤ 255 gives an 8-bit frame, ≤ 1023 a 10-bit one.
pub fn read_pgm<R: Read>(reader: R) -> Result<FrameGray> {
    let mut r = BufReader::new(reader);
    let mut header = Vec::new();
    // magic, width, height, maxval
    while header.len() < 4 {
        let mut line = String::new();
        if r.read_line(&mut line)? == 0 {
            return invalid("truncated PGM header");
        }
        let content = line.split('#').next().unwrap_or("");
        header.extend(content.split_whitespace().map(str::to_owned));
    }
    if header[0] != "P5" {
        return invalid(format!("not a binary PGM (magic {:?})", header[0]));
    }
    let parse = |s: &str, what: &str| -> Result<usize> {
        s.parse::<usize>()
            .map_err(|_| Error::InvalidInput(format!("bad PGM {what}: {s:?}")))
    };
    let width = parse(&header[1], "width")?;
    let height = parse(&header[2], "height")?;
    let maxval = parse(&header[3], "maxval")?;
    let bit_depth = match maxval {
        1..=255 => 8,
        256..=1023 => 10,
        _ => return invalid(format!("unsupported PGM maxval {maxval}")),
    };
    let n = width * height;
    let values = if maxval < 256 {
        let mut buf = vec![0u8; n];
        r.read_exact(&mut buf)?;
        buf.into_iter().map(u16::from).collect()
    } else {
        let mut buf = vec![0u8; 2 * n];
        r.read_exact(&mut buf)?;
        buf.chunks_exact(2)
            .map(|b| u16::from_be_bytes([b[0], b[1]]))
            .collect()
    };
    FrameGray::new(width, height, bit_depth, values)
}

pub fn write_pgm<W: Write>(frame: &FrameGray, mut out: W) -> Result<()> {
    let maxval = frame.max_value();
    write!(out, "P5\n{} {}\n{}\n", frame.width, frame.height, maxval)?;
    if maxval < 256 {
        let bytes: Vec<u8> = frame.values.iter().map(|&v| v as u8).collect();
        out.write_all(&bytes)?;
    } else {
        let bytes: Vec<u8> = frame.values.iter().flat_map(|v| v.to_be_bytes()).collect();
        out.write_all(&bytes)?;
    }
    Ok(())
}

pub fn read_pgm_file(path: &Path) -> Result<FrameGray> {
    read_pgm(fs::File::open(path)?)
}

pub fn write_pgm_file(frame: &FrameGray, path: &Path) -> Result<()> {
    let mut f = std::io::BufWriter::new(fs::File::create(path)?);
    write_pgm(frame, &mut f)?;
    f.flush()?;
    Ok(())
}

/// `.pgm` files of a directory in lexicographic order.
pub fn list_pgm_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.is_file()
                && p.extension()
                    .is_some_and(|e| e.eq_ignore_ascii_case("pgm"))
        })
        .collect();
    files.sort();
    Ok(files)
}

pub fn read_pgm_dir(dir: &Path) -> Result<Vec<FrameGray>> {
    list_pgm_files(dir)?
        .iter()
        .map(|p| read_pgm_file(p))
        .collect()
}
