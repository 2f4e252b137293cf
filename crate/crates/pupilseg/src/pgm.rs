//! Binary PGM (P5) reader and writer.
//!
//! The accepted format is: magic `P5`, whitespace-separated width, height
//! and maxval (255 only), one whitespace byte, then width*height raw bytes
//! row-major. `#` comments are skipped in the header. Parse errors carry the
//! byte offset they occurred at.

use std::path::Path;

use crate::filters::GrayImage;
use crate::{Error, Result};

struct Cursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn skip_whitespace_and_comments(&mut self) {
        while self.pos < self.data.len() {
            match self.data[self.pos] {
                b' ' | b'\t' | b'\r' | b'\n' => self.pos += 1,
                b'#' => {
                    while self.pos < self.data.len() && self.data[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                _ => break,
            }
        }
    }

    fn read_number(&mut self, what: &str) -> Result<u32> {
        self.skip_whitespace_and_comments();
        let start = self.pos;
        while self.pos < self.data.len() && self.data[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(Error::Parse {
                offset: start,
                message: format!("expected {what}"),
            });
        }
        std::str::from_utf8(&self.data[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| Error::Parse {
                offset: start,
                message: format!("{what} out of range"),
            })
    }
}

pub fn read_pgm_bytes(data: &[u8]) -> Result<GrayImage> {
    if data.len() < 2 || data[0] != b'P' {
        return Err(Error::Parse {
            offset: 0,
            message: "missing PNM magic number".into(),
        });
    }
    match data[1] {
        b'5' => {}
        b'2' => {
            return Err(Error::Format(
                "ASCII PGM (P2) is not supported; convert to binary P5".into(),
            ))
        }
        other => {
            return Err(Error::Format(format!(
                "unsupported PNM type P{}; only binary grayscale P5 is accepted",
                other as char
            )))
        }
    }
    let mut cur = Cursor { data, pos: 2 };
    let width = cur.read_number("width")? as usize;
    let height = cur.read_number("height")? as usize;
    let maxval = cur.read_number("maxval")?;
    if maxval != 255 {
        return Err(Error::Format(format!(
            "unsupported maxval {maxval}; only 8-bit images (maxval 255) are accepted"
        )));
    }
    // Exactly one whitespace byte separates the header from the payload.
    if cur.pos >= data.len() || !data[cur.pos].is_ascii_whitespace() {
        return Err(Error::Parse {
            offset: cur.pos,
            message: "expected whitespace after maxval".into(),
        });
    }
    cur.pos += 1;
    let expected = width * height;
    let actual = data.len() - cur.pos;
    if actual < expected {
        return Err(Error::Parse {
            offset: data.len(),
            message: format!("truncated pixel payload: expected {expected} bytes, got {actual}"),
        });
    }
    GrayImage::new(width, height, data[cur.pos..cur.pos + expected].to_vec())
}

pub fn read_pgm(path: impl AsRef<Path>) -> Result<GrayImage> {
    read_pgm_bytes(&std::fs::read(path)?)
}

pub fn pgm_bytes(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend_from_slice(img.pixels());
    out
}

pub fn write_pgm(img: &GrayImage, path: impl AsRef<Path>) -> Result<()> {
    Ok(std::fs::write(path, pgm_bytes(img))?)
}
