//! MUGD binary grid format, little-endian:
//!
//! ```text
//! offset  size  field
//! 0       4     magic "MUGD"
//! 4       4     u32 version (1)
//! 8       12    u32 nx, ny, nz
//! 20      12    f32 origin x, y, z
//! 32      4     f32 spacing
//! 36      4     u32 map count
//! 40      ...   per map: u16 label length, label bytes (UTF-8),
//!               nx·ny·nz f32 values, x fastest
//! ```

use std::io::{Read, Write};

use super::{GridMap, GridMapSet, GridSpec};
use crate::error::GridError;

pub const MUGD_MAGIC: [u8; 4] = *b"MUGD";
pub const MUGD_VERSION: u32 = 1;

pub fn write_grid_set<W: Write>(set: &GridMapSet, mut sink: W) -> Result<(), GridError> {
    let spec = set.spec();
    let mut header = Vec::with_capacity(40);
    header.extend_from_slice(&MUGD_MAGIC);
    header.extend_from_slice(&MUGD_VERSION.to_le_bytes());
    for d in spec.dims {
        header.extend_from_slice(&(d as u32).to_le_bytes());
    }
    for o in spec.origin {
        header.extend_from_slice(&o.to_le_bytes());
    }
    header.extend_from_slice(&spec.spacing.to_le_bytes());
    header.extend_from_slice(&(set.maps().len() as u32).to_le_bytes());
    sink.write_all(&header)?;
    for map in set.maps() {
        let label = map.label.as_bytes();
        let len = u16::try_from(label.len())
            .map_err(|_| GridError::SizeMismatch(format!("label {:?} longer than 65535 bytes", map.label)))?;
        sink.write_all(&len.to_le_bytes())?;
        sink.write_all(label)?;
        let mut payload = Vec::with_capacity(map.values.len() * 4);
        for v in &map.values {
            payload.extend_from_slice(&v.to_le_bytes());
        }
        sink.write_all(&payload)?;
    }
    sink.flush()?;
    Ok(())
}

fn read_exact<R: Read>(src: &mut R, buf: &mut [u8], what: &'static str) -> Result<(), GridError> {
    src.read_exact(buf).map_err(|e| match e.kind() {
        std::io::ErrorKind::UnexpectedEof => GridError::UnexpectedEnd(what),
        _ => GridError::Io(e),
    })
}

fn read_u32<R: Read>(src: &mut R, what: &'static str) -> Result<u32, GridError> {
    let mut b = [0u8; 4];
    read_exact(src, &mut b, what)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f32<R: Read>(src: &mut R, what: &'static str) -> Result<f32, GridError> {
    Ok(f32::from_bits(read_u32(src, what)?))
}

pub fn read_grid_set<R: Read>(mut source: R) -> Result<GridMapSet, GridError> {
    let mut magic = [0u8; 4];
    read_exact(&mut source, &mut magic, "magic")?;
    if magic != MUGD_MAGIC {
        return Err(GridError::BadMagic { found: magic });
    }
    let version = read_u32(&mut source, "version")?;
    if version != MUGD_VERSION {
        return Err(GridError::Version(version));
    }
    let mut dims = [0usize; 3];
    for d in &mut dims {
        *d = read_u32(&mut source, "dims")? as usize;
    }
    let mut origin = [0.0f32; 3];
    for o in &mut origin {
        *o = read_f32(&mut source, "origin")?;
    }
    let spacing = read_f32(&mut source, "spacing")?;
    let spec = GridSpec::new(origin, spacing, dims)?;
    let count = read_u32(&mut source, "map count")? as usize;
    let n = spec.n_nodes();
    let mut maps = Vec::with_capacity(count.min(1024));
    for m in 0..count {
        let mut len = [0u8; 2];
        read_exact(&mut source, &mut len, "label length")?;
        let mut label = vec![0u8; u16::from_le_bytes(len) as usize];
        read_exact(&mut source, &mut label, "label")?;
        let label = String::from_utf8(label).map_err(|_| GridError::SizeMismatch(format!("map {m} label is not UTF-8")))?;
        let mut payload = vec![0u8; n * 4];
        let mut filled = 0;
        while filled < payload.len() {
            match source.read(&mut payload[filled..]) {
                Ok(0) => {
                    return Err(GridError::SizeMismatch(format!(
                        "map {label:?} payload has {} bytes, expected {} ({}x{}x{} f32)",
                        filled,
                        n * 4,
                        dims[0],
                        dims[1],
                        dims[2]
                    )))
                }
                Ok(k) => filled += k,
                Err(e) if e.kind() == std::io::ErrorKind::Interrupted => {}
                Err(e) => return Err(GridError::Io(e)),
            }
        }
        let values = payload.chunks_exact(4).map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]])).collect();
        maps.push(GridMap { label, values });
    }
    let mut trailing = [0u8; 1];
    if source.read(&mut trailing)? != 0 {
        return Err(GridError::SizeMismatch("trailing bytes after the last map".into()));
    }
    GridMapSet::new(spec, maps)
}
