use crate::demux::{DepthMap, TofMapSet};
use crate::error::{Error, Result};
use crate::render::{ShadowMaskSet, TransientCube};
use std::fs;
use std::path::Path;

pub const TRANSIENT_MAGIC: &[u8; 8] = b"SB3DTRNS";
pub const DEPTH_MAGIC: &[u8; 8] = b"SB3DDPTH";
pub const TOF_MAGIC: &[u8; 8] = b"SB3DTOFM";
pub const FORMAT_VERSION: u32 = 1;

/// Header shared by the transient, depth and ToF files: magic, version,
/// three u32 dimensions and two f64 parameters, all little-endian.
pub const HEADER_LEN: usize = 8 + 4 + 3 * 4 + 2 * 8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Header {
    pub n_x: u32,
    pub n_y: u32,
    pub n_t: u32,
    pub delta_ps: f64,
    pub gate_path_min: f64,
}

fn encode(magic: &[u8; 8], h: &Header, payload: &[f32]) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 4 * payload.len());
    out.extend_from_slice(magic);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    for v in [h.n_x, h.n_y, h.n_t] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out.extend_from_slice(&h.delta_ps.to_le_bytes());
    out.extend_from_slice(&h.gate_path_min.to_le_bytes());
    for v in payload {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

fn decode(magic: &[u8; 8], bytes: &[u8]) -> Result<(Header, Vec<f32>)> {
    if bytes.len() < 8 || &bytes[..8] != magic {
        let found = String::from_utf8_lossy(&bytes[..bytes.len().min(8)]).into_owned();
        return Err(Error::BadMagic {
            expected: String::from_utf8_lossy(magic).into_owned(),
            found,
        });
    }
    if bytes.len() < HEADER_LEN {
        return Err(Error::Truncated {
            expected: HEADER_LEN as u64,
            found: bytes.len() as u64,
        });
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
    let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
    let version = u32_at(8);
    if version != FORMAT_VERSION {
        return Err(Error::VersionMismatch {
            expected: FORMAT_VERSION,
            found: version,
        });
    }
    let h = Header {
        n_x: u32_at(12),
        n_y: u32_at(16),
        n_t: u32_at(20),
        delta_ps: f64_at(24),
        gate_path_min: f64_at(32),
    };
    let count = (h.n_x as usize)
        .checked_mul(h.n_y as usize)
        .and_then(|v| v.checked_mul(h.n_t as usize))
        .ok_or_else(|| Error::InvalidInput("header dimensions overflow".into()))?;
    let expected = HEADER_LEN + 4 * count;
    if bytes.len() < expected {
        return Err(Error::Truncated {
            expected: expected as u64,
            found: bytes.len() as u64,
        });
    }
    if bytes.len() > expected {
        return Err(Error::InvalidInput(format!(
            "{} trailing bytes after payload",
            bytes.len() - expected
        )));
    }
    let payload = bytes[HEADER_LEN..]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok((h, payload))
}

pub fn transient_to_bytes(cube: &TransientCube) -> Vec<u8> {
    let h = Header {
        n_x: cube.n_x as u32,
        n_y: cube.n_y as u32,
        n_t: cube.n_t as u32,
        delta_ps: cube.delta_ps,
        gate_path_min: cube.gate_path_min,
    };
    encode(TRANSIENT_MAGIC, &h, &cube.data)
}

pub fn transient_from_bytes(bytes: &[u8]) -> Result<TransientCube> {
    let (h, data) = decode(TRANSIENT_MAGIC, bytes)?;
    let cube = TransientCube {
        n_x: h.n_x as usize,
        n_y: h.n_y as usize,
        n_t: h.n_t as usize,
        delta_ps: h.delta_ps,
        gate_path_min: h.gate_path_min,
        data,
    };
    cube.validate()?;
    Ok(cube)
}

pub fn write_transient(path: &Path, cube: &TransientCube) -> Result<()> {
    fs::write(path, transient_to_bytes(cube))?;
    Ok(())
}

pub fn read_transient(path: &Path) -> Result<TransientCube> {
    transient_from_bytes(&fs::read(path)?)
}

/// Depth as f32 meters with `n_t = 1`; invalid pixels are stored as NaN.
pub fn write_depth(path: &Path, depth: &DepthMap) -> Result<()> {
    let h = Header {
        n_x: depth.n_x as u32,
        n_y: depth.n_y as u32,
        n_t: 1,
        delta_ps: 0.0,
        gate_path_min: 0.0,
    };
    let payload: Vec<f32> = depth
        .depth
        .iter()
        .zip(&depth.valid)
        .map(|(&d, &v)| if v { d as f32 } else { f32::NAN })
        .collect();
    fs::write(path, encode(DEPTH_MAGIC, &h, &payload))?;
    Ok(())
}

pub fn read_depth(path: &Path) -> Result<DepthMap> {
    let (h, data) = decode(DEPTH_MAGIC, &fs::read(path)?)?;
    if h.n_t != 1 {
        return Err(Error::InvalidInput(format!(
            "depth file has n_t = {}",
            h.n_t
        )));
    }
    let valid = data.iter().map(|v| v.is_finite()).collect();
    let depth = data
        .iter()
        .map(|&v| if v.is_finite() { v as f64 } else { 0.0 })
        .collect();
    DepthMap::new(h.n_x as usize, h.n_y as usize, depth, valid)
}

/// Two-bounce ToF maps in seconds, one slice per spot (`n_t` = spot
/// count), ordered `(y, x, spot)`. Invalid pixels are NaN.
pub fn write_tof(path: &Path, tof: &TofMapSet) -> Result<()> {
    let n = tof.n_x * tof.n_y;
    let mut payload = Vec::with_capacity(n * tof.len());
    for pix in 0..n {
        for s in 0..tof.len() {
            payload.push(if tof.valid[pix] {
                tof.maps[s][pix] as f32
            } else {
                f32::NAN
            });
        }
    }
    let h = Header {
        n_x: tof.n_x as u32,
        n_y: tof.n_y as u32,
        n_t: tof.len() as u32,
        delta_ps: 0.0,
        gate_path_min: 0.0,
    };
    fs::write(path, encode(TOF_MAGIC, &h, &payload))?;
    Ok(())
}

pub fn read_tof(path: &Path) -> Result<TofMapSet> {
    let (h, data) = decode(TOF_MAGIC, &fs::read(path)?)?;
    let (n, spots) = ((h.n_x * h.n_y) as usize, h.n_t as usize);
    let mut maps = vec![vec![0.0; n]; spots];
    let mut valid = vec![true; n];
    for pix in 0..n {
        for s in 0..spots {
            let v = data[pix * spots + s];
            if v.is_finite() {
                maps[s][pix] = v as f64;
            } else {
                valid[pix] = false;
            }
        }
    }
    Ok(TofMapSet {
        n_x: h.n_x as usize,
        n_y: h.n_y as usize,
        maps,
        valid,
    })
}

/// Binary PGM (P5), 0 for false and 255 for true.
pub fn mask_to_pgm(n_x: usize, n_y: usize, mask: &[bool]) -> Vec<u8> {
    let mut out = format!("P5\n{n_x} {n_y}\n255\n").into_bytes();
    out.extend(mask.iter().map(|&m| if m { 255u8 } else { 0 }));
    out
}

/// 8-bit grayscale PGM from values scaled so that `max` maps to 255.
pub fn gray_to_pgm(n_x: usize, n_y: usize, values: &[f64], max: f64) -> Vec<u8> {
    let mut out = format!("P5\n{n_x} {n_y}\n255\n").into_bytes();
    let scale = if max > 0.0 { 255.0 / max } else { 0.0 };
    out.extend(
        values
            .iter()
            .map(|&v| (v * scale).round().clamp(0.0, 255.0) as u8),
    );
    out
}

/// Parses a binary PGM with maxval 255; returns `(n_x, n_y, pixels)`.
pub fn parse_pgm(bytes: &[u8]) -> Result<(usize, usize, Vec<u8>)> {
    let bad = |m: &str| Error::InvalidInput(format!("PGM: {m}"));
    let mut fields = Vec::new();
    let mut i = 0;
    while fields.len() < 4 {
        while i < bytes.len() && bytes[i].is_ascii_whitespace() {
            i += 1;
        }
        if i < bytes.len() && bytes[i] == b'#' {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        while i < bytes.len() && !bytes[i].is_ascii_whitespace() {
            i += 1;
        }
        if start == i {
            return Err(bad("truncated header"));
        }
        fields.push(String::from_utf8_lossy(&bytes[start..i]).into_owned());
    }
    if fields[0] != "P5" {
        return Err(Error::BadMagic {
            expected: "P5".into(),
            found: fields[0].clone(),
        });
    }
    let num = |s: &str| s.parse::<usize>().map_err(|_| bad("bad number"));
    let (n_x, n_y, maxval) = (num(&fields[1])?, num(&fields[2])?, num(&fields[3])?);
    if maxval != 255 {
        return Err(bad("only maxval 255 is supported"));
    }
    let data = &bytes[(i + 1).min(bytes.len())..];
    if data.len() < n_x * n_y {
        return Err(Error::Truncated {
            expected: (n_x * n_y) as u64,
            found: data.len() as u64,
        });
    }
    Ok((n_x, n_y, data[..n_x * n_y].to_vec()))
}

pub fn write_mask(path: &Path, n_x: usize, n_y: usize, mask: &[bool]) -> Result<()> {
    fs::write(path, mask_to_pgm(n_x, n_y, mask))?;
    Ok(())
}

pub fn read_mask(path: &Path) -> Result<(usize, usize, Vec<bool>)> {
    let (n_x, n_y, px) = parse_pgm(&fs::read(path)?)?;
    Ok((n_x, n_y, px.into_iter().map(|p| p >= 128).collect()))
}

/// File name of spot `s`'s mask inside a mask directory.
pub fn mask_file_name(s: usize) -> String {
    format!("shadow_{s:03}.pgm")
}

pub fn write_shadow_masks(dir: &Path, masks: &ShadowMaskSet) -> Result<()> {
    fs::create_dir_all(dir)?;
    for (s, m) in masks.masks.iter().enumerate() {
        write_mask(&dir.join(mask_file_name(s)), masks.n_x, masks.n_y, m)?;
    }
    Ok(())
}

/// Reads `shadow_000.pgm`, `shadow_001.pgm`, ... until the first gap.
pub fn read_shadow_masks(dir: &Path) -> Result<ShadowMaskSet> {
    let mut masks = Vec::new();
    let mut dims = None;
    loop {
        let p = dir.join(mask_file_name(masks.len()));
        if !p.exists() {
            break;
        }
        let (n_x, n_y, m) = read_mask(&p)?;
        if *dims.get_or_insert((n_x, n_y)) != (n_x, n_y) {
            return Err(Error::GeometryMismatch(format!(
                "{} has a different size",
                p.display()
            )));
        }
        masks.push(m);
    }
    let (n_x, n_y) =
        dims.ok_or_else(|| Error::InvalidInput(format!("no shadow masks in {}", dir.display())))?;
    Ok(ShadowMaskSet { n_x, n_y, masks })
}
