//! File formats.
//!
//! Tensor files: `b"CDLT"`, version byte `0x01`, dtype byte `0x01` (f64 LE),
//! `ndim` as one byte, each dim as u64 LE, then the row-major f64 LE payload.
//! Dictionary files are a tensor `[C, M, n_r, n_c]` of compact filters
//! followed by a u32 LE length and a UTF-8 JSON object with `filter_shape`,
//! `norm_mode` and `channels`. Trace files are CSV.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use cdl_core::driver::{ConvergenceTrace, TraceRow};
use cdl_core::{ConstraintSet, Dictionary, Mask, NormMode, Shape2, Signals};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"CDLT";
const VERSION: u8 = 0x01;
const DTYPE_F64: u8 = 0x01;

/// Dense row-major f64 array.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor {
    pub dims: Vec<usize>,
    pub data: Vec<f64>,
}

impl Tensor {
    pub fn new(dims: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        if dims.iter().product::<usize>() != data.len() {
            return Err(Error::Usage(format!("tensor dims {dims:?} do not match {} values", data.len())));
        }
        Ok(Tensor { dims, data })
    }
}

pub fn encode_tensor(t: &Tensor) -> Vec<u8> {
    let mut out = Vec::with_capacity(7 + 8 * t.dims.len() + 8 * t.data.len());
    out.extend_from_slice(MAGIC);
    out.push(VERSION);
    out.push(DTYPE_F64);
    out.push(t.dims.len() as u8);
    for &d in &t.dims {
        out.extend_from_slice(&(d as u64).to_le_bytes());
    }
    for v in &t.data {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

/// Decodes a tensor from the front of `bytes`, returning it and the number of
/// bytes consumed.
pub fn decode_tensor(bytes: &[u8], path: &Path) -> Result<(Tensor, usize)> {
    let bad = |msg: &str| Error::format(path, msg);
    if bytes.len() < 7 {
        return Err(bad("truncated tensor header"));
    }
    if &bytes[..4] != MAGIC {
        return Err(bad("not a tensor file (bad magic)"));
    }
    if bytes[4] != VERSION {
        return Err(bad(&format!("unsupported tensor version {}", bytes[4])));
    }
    if bytes[5] != DTYPE_F64 {
        return Err(bad(&format!("unsupported dtype {}", bytes[5])));
    }
    let ndim = bytes[6] as usize;
    let mut pos = 7;
    let mut dims = Vec::with_capacity(ndim);
    for _ in 0..ndim {
        let b = bytes.get(pos..pos + 8).ok_or_else(|| bad("truncated tensor dims"))?;
        dims.push(u64::from_le_bytes(b.try_into().unwrap()) as usize);
        pos += 8;
    }
    let count = dims
        .iter()
        .try_fold(1usize, |a, &d| a.checked_mul(d))
        .and_then(|c| c.checked_mul(8).map(|_| c))
        .ok_or_else(|| bad("tensor size overflows"))?;
    let payload = bytes.get(pos..pos + count * 8).ok_or_else(|| bad("truncated tensor payload"))?;
    let data = payload.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    Ok((Tensor { dims, data }, pos + count * 8))
}

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn save_tensor(path: &Path, t: &Tensor) -> Result<()> {
    write(path, &encode_tensor(t))
}

pub fn load_tensor(path: &Path) -> Result<Tensor> {
    Ok(decode_tensor(&read(path)?, path)?.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DictMeta {
    pub filter_shape: [usize; 2],
    pub norm_mode: String,
    pub channels: usize,
}

pub fn save_dictionary(path: &Path, d: &Dictionary) -> Result<()> {
    let f = d.filter_shape();
    let t = Tensor { dims: vec![d.channels(), d.filters(), f.rows, f.cols], data: d.to_compact() };
    let meta = DictMeta { filter_shape: [f.rows, f.cols], norm_mode: d.norm_mode().as_str().to_string(), channels: d.channels() };
    let json = serde_json::to_vec(&meta).expect("metadata serialises");
    let mut bytes = encode_tensor(&t);
    bytes.extend_from_slice(&(json.len() as u32).to_le_bytes());
    bytes.extend_from_slice(&json);
    write(path, &bytes)
}

/// Reads the compact filters `[C, M, n_r, n_c]` and metadata.
pub fn read_dictionary_file(path: &Path) -> Result<(Tensor, DictMeta)> {
    let bytes = read(path)?;
    let (t, used) = decode_tensor(&bytes, path)?;
    let rest = &bytes[used..];
    let len = rest.get(..4).ok_or_else(|| Error::format(path, "missing dictionary metadata"))?;
    let len = u32::from_le_bytes(len.try_into().unwrap()) as usize;
    let json = rest.get(4..4 + len).ok_or_else(|| Error::format(path, "truncated dictionary metadata"))?;
    let meta: DictMeta = serde_json::from_slice(json).map_err(|e| Error::format(path, format!("bad dictionary metadata: {e}")))?;
    if t.dims.len() != 4 || t.dims[0] != meta.channels || t.dims[2..] != meta.filter_shape {
        return Err(Error::format(path, "dictionary tensor does not match its metadata"));
    }
    Ok((t, meta))
}

/// Loads a dictionary and zero-pads its filters to `image`.
pub fn load_dictionary(path: &Path, image: Shape2) -> Result<Dictionary> {
    let (t, meta) = read_dictionary_file(path)?;
    let mode = NormMode::parse(&meta.norm_mode).ok_or_else(|| Error::format(path, "unknown norm mode"))?;
    let filter = Shape2::new(meta.filter_shape[0], meta.filter_shape[1]);
    let cset = ConstraintSet::new(image, filter, mode)?;
    Ok(Dictionary::from_compact(cset, t.dims[1], meta.channels, &t.data)?)
}

pub const TRACE_HEADER: &str = "iter,time_s,objective,fidelity,l1,r_primal_x,r_dual_x,r_primal_d,r_dual_d";

pub fn format_trace(trace: &ConvergenceTrace) -> String {
    let mut s = String::from(TRACE_HEADER);
    s.push('\n');
    for r in &trace.rows {
        s.push_str(&format!(
            "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
            r.iter, r.time_s, r.objective, r.fidelity, r.l1, r.r_primal_x, r.r_dual_x, r.r_primal_d, r.r_dual_d
        ));
    }
    s
}

pub fn emit_trace(trace: &ConvergenceTrace, path: &Path) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(format_trace(trace).as_bytes()).map_err(|e| Error::io(path, e))
}

pub fn parse_trace(text: &str, path: &Path) -> Result<ConvergenceTrace> {
    let mut lines = text.lines();
    if lines.next() != Some(TRACE_HEADER) {
        return Err(Error::format(path, "missing trace header"));
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let bad = || Error::format(path, format!("bad trace row {}", i + 1));
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 9 {
            return Err(bad());
        }
        let v: Vec<f64> = f[1..].iter().map(|x| x.parse::<f64>()).collect::<std::result::Result<_, _>>().map_err(|_| bad())?;
        rows.push(TraceRow {
            iter: f[0].parse().map_err(|_| bad())?,
            time_s: v[0],
            objective: v[1],
            fidelity: v[2],
            l1: v[3],
            r_primal_x: v[4],
            r_dual_x: v[5],
            r_primal_d: v[6],
            r_dual_d: v[7],
        });
    }
    Ok(ConvergenceTrace { rows })
}

pub fn load_trace(path: &Path) -> Result<ConvergenceTrace> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_trace(&text, path)
}

/// One decoded 8-bit image, `channels` planes of `shape`.
struct Decoded {
    shape: Shape2,
    planes: Vec<Vec<f64>>,
}

fn decode_image(path: &Path, greyscale: bool) -> Result<Decoded> {
    let img = image::ImageReader::open(path)
        .map_err(|e| Error::io(path, e))?
        .with_guessed_format()
        .map_err(|e| Error::io(path, e))?
        .decode()
        .map_err(|e| Error::format(path, e.to_string()))?;
    let shape = Shape2::new(img.height() as usize, img.width() as usize);
    let is_grey = !img.color().has_color();
    let planes = if is_grey {
        let l = img.to_luma8();
        let p: Vec<f64> = l.as_raw().iter().map(|&v| v as f64 / 255.0).collect();
        if greyscale {
            vec![p]
        } else {
            vec![p.clone(), p.clone(), p]
        }
    } else {
        let rgb = img.to_rgb8();
        let raw = rgb.as_raw();
        if greyscale {
            // ITU-R BT.601 luma
            vec![raw.chunks_exact(3).map(|c| (0.299 * c[0] as f64 + 0.587 * c[1] as f64 + 0.114 * c[2] as f64) / 255.0).collect()]
        } else {
            (0..3).map(|ch| raw.chunks_exact(3).map(|c| c[ch] as f64 / 255.0).collect()).collect()
        }
    };
    Ok(Decoded { shape, planes })
}

/// Loads 8-bit PGM/PNG images scaled to `[0, 1]`. With `greyscale` colour
/// images are converted by BT.601 luma; otherwise every image yields three
/// channels.
pub fn load_images(paths: &[PathBuf], greyscale: bool) -> Result<Signals> {
    if paths.is_empty() {
        return Err(Error::Usage("no input images".into()));
    }
    let decoded: Vec<Decoded> = paths.iter().map(|p| decode_image(p, greyscale)).collect::<Result<_>>()?;
    let shape = decoded[0].shape;
    for (d, p) in decoded.iter().zip(paths) {
        if d.shape != shape {
            return Err(Error::Core(cdl_core::CdlError::Dimension(format!(
                "{}: image is {}x{}, expected {}x{}",
                p.display(),
                d.shape.rows,
                d.shape.cols,
                shape.rows,
                shape.cols
            ))));
        }
    }
    let (k, c) = (decoded.len(), decoded[0].planes.len());
    let mut data = Vec::with_capacity(c * k * shape.len());
    for ch in 0..c {
        for d in &decoded {
            data.extend_from_slice(&d.planes[ch]);
        }
    }
    Ok(Signals::new(shape, c, k, data)?)
}

/// `.pgm` / `.png` files of a directory in name order.
pub fn list_images(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for e in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let p = e.map_err(|e| Error::io(dir, e))?.path();
        let ext = p.extension().and_then(|s| s.to_str()).map(|s| s.to_ascii_lowercase());
        if matches!(ext.as_deref(), Some("pgm" | "png")) {
            out.push(p);
        }
    }
    out.sort();
    if out.is_empty() {
        return Err(Error::format(dir, "no .pgm or .png images found"));
    }
    Ok(out)
}

/// Signals from a `[K, rows, cols]` or `[C, K, rows, cols]` tensor.
pub fn signals_from_tensor(t: &Tensor, path: &Path) -> Result<Signals> {
    let (c, k, r, cols) = match t.dims[..] {
        [k, r, c] => (1, k, r, c),
        [c, k, r, cc] => (c, k, r, cc),
        _ => return Err(Error::format(path, "image tensor must be [K,rows,cols] or [C,K,rows,cols]")),
    };
    Ok(Signals::new(Shape2::new(r, cols), c, k, t.data.clone())?)
}

pub fn signals_to_tensor(s: &Signals) -> Tensor {
    let sh = s.shape();
    let dims = if s.channels() == 1 {
        vec![s.images(), sh.rows, sh.cols]
    } else {
        vec![s.channels(), s.images(), sh.rows, sh.cols]
    };
    Tensor { dims, data: s.data().to_vec() }
}

/// Images from a directory of PGM/PNG files or a tensor file.
pub fn load_signals(path: &Path, greyscale: bool) -> Result<Signals> {
    if path.is_dir() {
        load_images(&list_images(path)?, greyscale)
    } else {
        signals_from_tensor(&load_tensor(path)?, path)
    }
}

/// Mask from a `[rows, cols]` or `[K, rows, cols]` tensor file.
pub fn load_mask(path: &Path) -> Result<Mask> {
    let t = load_tensor(path)?;
    Ok(match t.dims[..] {
        [r, c] => Mask::shared(Shape2::new(r, c), t.data)?,
        [k, r, c] => Mask::per_image(Shape2::new(r, c), k, t.data)?,
        _ => return Err(Error::format(path, "mask tensor must be [rows,cols] or [K,rows,cols]")),
    })
}

pub fn mask_to_tensor(m: &Mask) -> Tensor {
    let s = m.shape();
    let dims = match m.images() {
        None => vec![s.rows, s.cols],
        Some(k) => vec![k, s.rows, s.cols],
    };
    Tensor { dims, data: m.data().to_vec() }
}
