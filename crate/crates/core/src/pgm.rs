//! Binary PGM (P5) reading and writing with 8- or 16-bit samples.
//!
//! Samples wider than 8 bits are big-endian as the format requires. Comment
//! lines in the header are preserved so callers can carry metadata such as a
//! `scale` entry.

use std::io::{BufRead, Read, Write};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum PgmError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed PGM header: {0}")]
    Header(String),
    #[error("PGM data truncated: expected {expected} bytes, got {got}")]
    Truncated { expected: usize, got: usize },
}

/// Grayscale image, row-major, first row is the top of the image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pgm {
    pub width: usize,
    pub height: usize,
    pub maxval: u16,
    pub data: Vec<u16>,
    pub comments: Vec<String>,
}

impl Pgm {
    pub fn new(width: usize, height: usize, maxval: u16) -> Self {
        Self {
            width,
            height,
            maxval,
            data: vec![0; width * height],
            comments: Vec::new(),
        }
    }

    pub fn get(&self, row: usize, col: usize) -> u16 {
        self.data[row * self.width + col]
    }

    pub fn set(&mut self, row: usize, col: usize, v: u16) {
        self.data[row * self.width + col] = v;
    }

    /// Value of the first `# key value` comment, parsed as f64.
    pub fn comment_value(&self, key: &str) -> Option<f64> {
        self.comments.iter().find_map(|c| {
            let mut it = c.split_whitespace();
            (it.next()? == key).then_some(())?;
            it.next()?.parse().ok()
        })
    }

    pub fn write<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "P5")?;
        for c in &self.comments {
            writeln!(w, "# {c}")?;
        }
        write!(w, "{} {}\n{}\n", self.width, self.height, self.maxval)?;
        if self.maxval < 256 {
            let bytes: Vec<u8> = self.data.iter().map(|&v| v as u8).collect();
            w.write_all(&bytes)?;
        } else {
            let mut bytes = Vec::with_capacity(self.data.len() * 2);
            for v in &self.data {
                bytes.extend_from_slice(&v.to_be_bytes());
            }
            w.write_all(&bytes)?;
        }
        Ok(())
    }

    pub fn read<R: BufRead>(mut r: R) -> Result<Self, PgmError> {
        let mut comments = Vec::new();
        let mut tokens = Vec::new();
        while tokens.len() < 4 {
            let mut line = String::new();
            if r.read_line(&mut line)? == 0 {
                return Err(PgmError::Header("unexpected end of header".into()));
            }
            let (content, comment) = match line.find('#') {
                Some(i) => (&line[..i], Some(line[i + 1..].trim())),
                None => (line.as_str(), None),
            };
            tokens.extend(content.split_whitespace().map(str::to_owned));
            if let Some(c) = comment {
                comments.push(c.to_owned());
            }
        }
        if tokens.len() > 4 {
            return Err(PgmError::Header("raster must start on a new line".into()));
        }
        if tokens[0] != "P5" {
            return Err(PgmError::Header(format!("magic {:?} is not P5", tokens[0])));
        }
        let parse = |s: &str, what: &str| -> Result<usize, PgmError> {
            s.parse()
                .map_err(|_| PgmError::Header(format!("bad {what}: {s:?}")))
        };
        let width = parse(&tokens[1], "width")?;
        let height = parse(&tokens[2], "height")?;
        let maxval = parse(&tokens[3], "maxval")?;
        if maxval == 0 || maxval > 65535 {
            return Err(PgmError::Header(format!("maxval {maxval} out of range")));
        }
        let n = width * height;
        let bytes_per = if maxval < 256 { 1 } else { 2 };
        let mut raw = Vec::with_capacity(n * bytes_per);
        r.take((n * bytes_per) as u64).read_to_end(&mut raw)?;
        if raw.len() != n * bytes_per {
            return Err(PgmError::Truncated {
                expected: n * bytes_per,
                got: raw.len(),
            });
        }
        let data = if bytes_per == 1 {
            raw.into_iter().map(u16::from).collect()
        } else {
            raw.chunks_exact(2)
                .map(|c| u16::from_be_bytes([c[0], c[1]]))
                .collect()
        };
        Ok(Self {
            width,
            height,
            maxval: maxval as u16,
            data,
            comments,
        })
    }
}
