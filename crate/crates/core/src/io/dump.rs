use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::grid_spectral::{Field, GridSpec};

pub const MAGIC: &[u8; 5] = b"FCHQ1";
pub const VERSION: u32 = 1;

/// Bytes before the payload.
pub const HEADER_LEN: usize = 5 + 4 + 4 + 4 + 8 + 8 + 4;

/// One or more complex fields on a common grid together with the fractional
/// order they were computed for.
///
/// On disk: the magic `FCHQ1`, then little-endian `u32` version, `u32 N`,
/// `u32 M`, `f64 L`, `f64 α`, `u32` component count, then every component
/// as row-major interleaved `f64` real and imaginary parts.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldDump {
    pub alpha: f64,
    pub components: Vec<Field<f64>>,
}

fn format_err(msg: impl Into<String>) -> Error {
    Error::Format(msg.into())
}

fn read_array<const K: usize>(r: &mut impl Read, what: &str) -> Result<[u8; K]> {
    let mut b = [0u8; K];
    r.read_exact(&mut b).map_err(|e| match e.kind() {
        std::io::ErrorKind::UnexpectedEof => format_err(format!("file ends inside the {what}")),
        _ => Error::Io(e),
    })?;
    Ok(b)
}

fn read_u32(r: &mut impl Read, what: &str) -> Result<u32> {
    Ok(u32::from_le_bytes(read_array(r, what)?))
}

fn read_f64(r: &mut impl Read, what: &str) -> Result<f64> {
    Ok(f64::from_le_bytes(read_array(r, what)?))
}

impl FieldDump {
    /// Fails when `components` is empty or the components live on
    /// different grids.
    pub fn new(alpha: f64, components: Vec<Field<f64>>) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| Error::Data("a field dump needs at least one component".into()))?;
        for c in &components[1..] {
            first.ensure_same_grid(c)?;
        }
        Ok(Self { alpha, components })
    }

    pub fn single(alpha: f64, u: Field<f64>) -> Self {
        Self { alpha, components: vec![u] }
    }

    pub fn grid(&self) -> &GridSpec<f64> {
        self.components[0].grid()
    }

    /// Exact file size implied by the header.
    pub fn encoded_len(&self) -> usize {
        HEADER_LEN + self.components.len() * self.grid().len() * 16
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        let g = self.grid();
        let as_u32 = |v: usize, what: &str| {
            u32::try_from(v).map_err(|_| format_err(format!("{what} {v} does not fit in u32")))
        };
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        w.write_all(&as_u32(g.dim(), "dimension")?.to_le_bytes())?;
        w.write_all(&as_u32(g.points(), "point count")?.to_le_bytes())?;
        w.write_all(&g.length().to_le_bytes())?;
        w.write_all(&self.alpha.to_le_bytes())?;
        w.write_all(&as_u32(self.components.len(), "component count")?.to_le_bytes())?;
        for c in &self.components {
            for z in c.values() {
                w.write_all(&z.re.to_le_bytes())?;
                w.write_all(&z.im.to_le_bytes())?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Parses a dump and rejects trailing bytes.
    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let magic: [u8; 5] = read_array(&mut r, "magic")?;
        if &magic != MAGIC {
            return Err(format_err("not a field dump (bad magic)"));
        }
        let version = read_u32(&mut r, "header")?;
        if version != VERSION {
            return Err(format_err(format!("unsupported field dump version {version}")));
        }
        let dim = read_u32(&mut r, "header")? as usize;
        let points = read_u32(&mut r, "header")? as usize;
        let length = read_f64(&mut r, "header")?;
        let alpha = read_f64(&mut r, "header")?;
        let count = read_u32(&mut r, "header")? as usize;
        let grid = GridSpec::new(dim, points, length)
            .map_err(|e| format_err(format!("invalid grid in header: {e}")))?;
        if count == 0 {
            return Err(format_err("header declares zero components"));
        }
        let n = grid.len();
        let mut components = Vec::with_capacity(count);
        let mut buf = vec![0u8; n * 16];
        for j in 0..count {
            r.read_exact(&mut buf).map_err(|e| match e.kind() {
                std::io::ErrorKind::UnexpectedEof => {
                    format_err(format!("payload shorter than the header declares (component {j})"))
                }
                _ => Error::Io(e),
            })?;
            let values = buf
                .chunks_exact(16)
                .map(|b| {
                    let re = f64::from_le_bytes(b[..8].try_into().expect("8 bytes"));
                    let im = f64::from_le_bytes(b[8..].try_into().expect("8 bytes"));
                    Complex::new(re, im)
                })
                .collect();
            components.push(Field::new(grid, values)?);
        }
        let mut extra = [0u8; 1];
        if r.read(&mut extra)? != 0 {
            return Err(format_err("payload longer than the header declares"));
        }
        Ok(Self { alpha, components })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_to(BufWriter::new(File::create(path)?))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_from(BufReader::new(File::open(path)?))
    }
}
