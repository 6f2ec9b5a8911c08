//! Artifact files: orders, sample sets, measurements, graymaps and sidecars.
//!
//! Text forms start with a `# hsi-<kind>,version=1,key=value,...` header
//! line followed by a CSV table. Binary forms are little-endian with a short
//! magic and store coordinates as unsigned 16-bit `(u, v)` pairs.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use crate::acquisition::{MeasurementRecord, NoiseSpec};
use crate::error::{Error, Result};
use crate::ordering::{PatternOrder, SpectralCoord, Strategy};
use crate::raster::ImageBuffer;
use crate::sampler::{PfDraw, SampleSet};

pub const FORMAT_VERSION: u32 = 1;
const ORDER_MAGIC: &[u8; 6] = b"HSIORD";
const SAMPLE_MAGIC: &[u8; 6] = b"HSISMP";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Encoding {
    Csv,
    Binary,
}

impl Encoding {
    pub fn extension(self) -> &'static str {
        match self {
            Encoding::Csv => "csv",
            Encoding::Binary => "bin",
        }
    }
}

// ---------------------------------------------------------------------------
// header helpers

fn header_line(kind: &str, fields: &[(&str, String)]) -> String {
    let mut s = format!("# hsi-{kind},version={FORMAT_VERSION}");
    for (k, v) in fields {
        s.push(',');
        s.push_str(k);
        s.push('=');
        s.push_str(v);
    }
    s
}

struct Header {
    path: PathBuf,
    fields: BTreeMap<String, String>,
}

impl Header {
    fn parse(path: &Path, line: &str, kind: &str) -> Result<Self> {
        let body = line
            .trim_end()
            .strip_prefix("# hsi-")
            .ok_or_else(|| Error::format(path, "missing '# hsi-' header line"))?;
        let mut parts = body.split(',');
        let found = parts.next().unwrap_or_default();
        if found != kind {
            return Err(Error::format(path, format!("expected a {kind} file, found {found}")));
        }
        let mut fields = BTreeMap::new();
        for p in parts {
            let (k, v) = p
                .split_once('=')
                .ok_or_else(|| Error::format(path, format!("malformed header field '{p}'")))?;
            fields.insert(k.to_string(), v.to_string());
        }
        let h = Self {
            path: path.to_path_buf(),
            fields,
        };
        let version: u32 = h.parse_field("version")?;
        if version != FORMAT_VERSION {
            return Err(Error::format(path, format!("unsupported version {version}")));
        }
        Ok(h)
    }

    fn raw(&self, key: &str) -> Result<&str> {
        self.fields
            .get(key)
            .map(String::as_str)
            .ok_or_else(|| Error::format(&self.path, format!("header lacks '{key}'")))
    }

    fn parse_field<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        let raw = self.raw(key)?;
        raw.parse()
            .map_err(|_| Error::format(&self.path, format!("bad value '{raw}' for '{key}'")))
    }

    fn optional<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.fields.get(key).map(String::as_str) {
            None | Some("") => Ok(None),
            Some(_) => self.parse_field(key).map(Some),
        }
    }
}

fn opt_string<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn read_first_line(path: &Path) -> Result<(String, BufReader<File>)> {
    let mut reader = BufReader::new(File::open(path)?);
    let mut line = String::new();
    reader.read_line(&mut line)?;
    Ok((line, reader))
}

fn read_coord_table(
    path: &Path,
    reader: impl Read,
    u_col: usize,
    v_col: usize,
) -> Result<Vec<SpectralCoord>> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let get = |i: usize| -> Result<usize> {
            rec.get(i)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::format(path, format!("bad row {:?}", rec)))
        };
        out.push(SpectralCoord::new(get(u_col)?, get(v_col)?));
    }
    Ok(out)
}

fn is_binary(path: &Path, magic: &[u8; 6]) -> Result<bool> {
    let mut f = File::open(path)?;
    let mut buf = [0u8; 6];
    match f.read_exact(&mut buf) {
        Ok(()) => Ok(&buf == magic),
        Err(e) if e.kind() == std::io::ErrorKind::UnexpectedEof => Ok(false),
        Err(e) => Err(e.into()),
    }
}

struct ByteReader<'a> {
    path: &'a Path,
    buf: &'a [u8],
    pos: usize,
}

impl<'a> ByteReader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.buf.len() {
            return Err(Error::format(self.path, "truncated binary file"));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_bits(self.u64()?))
    }

    fn string(&mut self) -> Result<String> {
        let n = self.u16()? as usize;
        String::from_utf8(self.take(n)?.to_vec())
            .map_err(|_| Error::format(self.path, "invalid utf-8 string"))
    }

    fn coords(&mut self, count: usize) -> Result<Vec<SpectralCoord>> {
        (0..count)
            .map(|_| Ok(SpectralCoord::new(self.u16()? as usize, self.u16()? as usize)))
            .collect()
    }
}

fn put_string(buf: &mut Vec<u8>, s: &str) {
    buf.extend_from_slice(&(s.len() as u16).to_le_bytes());
    buf.extend_from_slice(s.as_bytes());
}

fn put_coords(buf: &mut Vec<u8>, coords: &[SpectralCoord]) -> Result<()> {
    for c in coords {
        let (u, v) = (u16::try_from(c.u), u16::try_from(c.v));
        match (u, v) {
            (Ok(u), Ok(v)) => {
                buf.extend_from_slice(&u.to_le_bytes());
                buf.extend_from_slice(&v.to_le_bytes());
            }
            _ => {
                return Err(Error::OutOfRange(format!(
                    "{c} does not fit the 16-bit binary form"
                )))
            }
        }
    }
    Ok(())
}

fn check_dims_u32(width: usize, height: usize) -> Result<(u32, u32)> {
    match (u32::try_from(width), u32::try_from(height)) {
        (Ok(w), Ok(h)) => Ok((w, h)),
        _ => Err(Error::Dimension(format!("{width}x{height} too large to store"))),
    }
}

// ---------------------------------------------------------------------------
// pattern orders

pub fn write_order_csv(order: &PatternOrder, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(
        w,
        "{}",
        header_line(
            "order",
            &[
                ("width", order.width().to_string()),
                ("height", order.height().to_string()),
                ("strategy", order.strategy().tag().to_string()),
                ("seed", opt_string(order.seed())),
                ("dataset_digest", opt_string(order.dataset_digest())),
                ("digest", order.digest()),
            ]
        )
    )?;
    writeln!(w, "index,u,v")?;
    for (i, c) in order.sequence().iter().enumerate() {
        writeln!(w, "{i},{},{}", c.u, c.v)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_order_bin(order: &PatternOrder, path: &Path) -> Result<()> {
    let (w, h) = check_dims_u32(order.width(), order.height())?;
    let mut buf = Vec::with_capacity(64 + 4 * order.len());
    buf.extend_from_slice(ORDER_MAGIC);
    buf.extend_from_slice(&(FORMAT_VERSION as u16).to_le_bytes());
    buf.extend_from_slice(&w.to_le_bytes());
    buf.extend_from_slice(&h.to_le_bytes());
    buf.push(order.strategy().code());
    buf.push(order.seed().is_some() as u8);
    buf.extend_from_slice(&order.seed().unwrap_or(0).to_le_bytes());
    put_string(&mut buf, order.dataset_digest().unwrap_or(""));
    buf.extend_from_slice(&(order.len() as u32).to_le_bytes());
    put_coords(&mut buf, order.sequence())?;
    std::fs::write(path, buf)?;
    Ok(())
}

/// Writes `<stem>.csv` and `<stem>.bin` next to each other; returns both paths.
pub fn write_order_both(order: &PatternOrder, stem: &Path) -> Result<(PathBuf, PathBuf)> {
    let csv = stem.with_extension("csv");
    let bin = stem.with_extension("bin");
    write_order_csv(order, &csv)?;
    write_order_bin(order, &bin)?;
    Ok((csv, bin))
}

pub fn write_order(order: &PatternOrder, path: &Path, enc: Encoding) -> Result<()> {
    match enc {
        Encoding::Csv => write_order_csv(order, path),
        Encoding::Binary => write_order_bin(order, path),
    }
}

/// Reads either encoding, detected from the leading bytes.
pub fn read_order(path: &Path) -> Result<PatternOrder> {
    if is_binary(path, ORDER_MAGIC)? {
        let bytes = std::fs::read(path)?;
        let mut r = ByteReader {
            path,
            buf: &bytes,
            pos: 6,
        };
        let version = r.u16()? as u32;
        if version != FORMAT_VERSION {
            return Err(Error::format(path, format!("unsupported version {version}")));
        }
        let width = r.u32()? as usize;
        let height = r.u32()? as usize;
        let strategy = Strategy::from_code(r.u8()?)
            .ok_or_else(|| Error::format(path, "unknown strategy code"))?;
        let has_seed = r.u8()? != 0;
        let seed = r.u64()?;
        let digest = r.string()?;
        let count = r.u32()? as usize;
        let seq = r.coords(count)?;
        return PatternOrder::new(
            width,
            height,
            strategy,
            has_seed.then_some(seed),
            (!digest.is_empty()).then_some(digest),
            seq,
        );
    }
    let (line, reader) = read_first_line(path)?;
    let h = Header::parse(path, &line, "order")?;
    let strategy: Strategy = h.raw("strategy")?.parse()?;
    let seq = read_coord_table(path, reader, 1, 2)?;
    PatternOrder::new(
        h.parse_field("width")?,
        h.parse_field("height")?,
        strategy,
        h.optional("seed")?,
        h.optional("dataset_digest")?,
        seq,
    )
}

// ---------------------------------------------------------------------------
// sample sets

pub fn write_samples_csv(s: &SampleSet, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    let pf = s.pf();
    writeln!(
        w,
        "{}",
        header_line(
            "samples",
            &[
                ("width", s.width().to_string()),
                ("height", s.height().to_string()),
                ("sr", s.sampling_ratio().to_string()),
                ("m", s.len().to_string()),
                ("a", opt_string(pf.map(|p| p.a))),
                ("seed", opt_string(pf.map(|p| p.seed))),
                ("drawn", opt_string(pf.map(|p| p.drawn))),
                ("order_digest", s.order_digest().to_string()),
            ]
        )
    )?;
    writeln!(w, "index,u,v")?;
    for (i, c) in s.selected().iter().enumerate() {
        writeln!(w, "{i},{},{}", c.u, c.v)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_samples_bin(s: &SampleSet, path: &Path) -> Result<()> {
    let (w, h) = check_dims_u32(s.width(), s.height())?;
    let mut buf = Vec::with_capacity(96 + 4 * s.len());
    buf.extend_from_slice(SAMPLE_MAGIC);
    buf.extend_from_slice(&(FORMAT_VERSION as u16).to_le_bytes());
    buf.extend_from_slice(&w.to_le_bytes());
    buf.extend_from_slice(&h.to_le_bytes());
    buf.extend_from_slice(&s.sampling_ratio().to_bits().to_le_bytes());
    match s.pf() {
        Some(p) => {
            buf.push(1);
            buf.extend_from_slice(&p.a.to_bits().to_le_bytes());
            buf.extend_from_slice(&p.seed.to_le_bytes());
            buf.extend_from_slice(&(p.drawn as u64).to_le_bytes());
        }
        None => buf.push(0),
    }
    put_string(&mut buf, s.order_digest());
    buf.extend_from_slice(&(s.len() as u32).to_le_bytes());
    put_coords(&mut buf, s.selected())?;
    std::fs::write(path, buf)?;
    Ok(())
}

pub fn write_samples(s: &SampleSet, path: &Path, enc: Encoding) -> Result<()> {
    match enc {
        Encoding::Csv => write_samples_csv(s, path),
        Encoding::Binary => write_samples_bin(s, path),
    }
}

pub fn read_samples(path: &Path) -> Result<SampleSet> {
    if is_binary(path, SAMPLE_MAGIC)? {
        let bytes = std::fs::read(path)?;
        let mut r = ByteReader {
            path,
            buf: &bytes,
            pos: 6,
        };
        let version = r.u16()? as u32;
        if version != FORMAT_VERSION {
            return Err(Error::format(path, format!("unsupported version {version}")));
        }
        let width = r.u32()? as usize;
        let height = r.u32()? as usize;
        let sr = r.f64()?;
        let pf = if r.u8()? == 1 {
            Some(PfDraw {
                a: r.f64()?,
                seed: r.u64()?,
                drawn: r.u64()? as usize,
            })
        } else {
            None
        };
        let digest = r.string()?;
        let count = r.u32()? as usize;
        let coords = r.coords(count)?;
        return SampleSet::from_parts(width, height, sr, digest, pf, coords);
    }
    let (line, reader) = read_first_line(path)?;
    let h = Header::parse(path, &line, "samples")?;
    let pf = match (h.optional::<f64>("a")?, h.optional::<u64>("seed")?) {
        (Some(a), Some(seed)) => Some(PfDraw {
            a,
            seed,
            drawn: h.optional("drawn")?.unwrap_or(0),
        }),
        _ => None,
    };
    let coords = read_coord_table(path, reader, 1, 2)?;
    let m: usize = h.parse_field("m")?;
    if m != coords.len() {
        return Err(Error::format(
            path,
            format!("header says m={m} but {} rows follow", coords.len()),
        ));
    }
    SampleSet::from_parts(
        h.parse_field("width")?,
        h.parse_field("height")?,
        h.parse_field("sr")?,
        h.raw("order_digest")?.to_string(),
        pf,
        coords,
    )
}

// ---------------------------------------------------------------------------
// measurements

/// Measurement file contents with the provenance carried in its header.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementFile {
    pub width: usize,
    pub height: usize,
    pub object_digest: String,
    pub samples_digest: String,
    pub noise: NoiseSpec,
    pub records: Vec<MeasurementRecord>,
}

pub fn write_measurements(m: &MeasurementFile, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(
        w,
        "{}",
        header_line(
            "measurements",
            &[
                ("width", m.width.to_string()),
                ("height", m.height.to_string()),
                ("object_digest", m.object_digest.clone()),
                ("samples_digest", m.samples_digest.clone()),
                ("noise_object", m.noise.object_sigma_rel.to_string()),
                ("noise_measurement", m.noise.measurement_sigma_rel.to_string()),
                ("seed", m.noise.seed.to_string()),
            ]
        )
    )?;
    let split = m.records.iter().any(|r| r.plus.is_some() || r.minus.is_some());
    writeln!(w, "{}", if split { "u,v,B,B_plus,B_minus" } else { "u,v,B" })?;
    let opt = |x: Option<f64>| x.map(|v| format!("{v:?}")).unwrap_or_default();
    for r in &m.records {
        // `{:?}` prints the shortest representation that round-trips exactly.
        if split {
            writeln!(
                w,
                "{},{},{:?},{},{}",
                r.coord.u,
                r.coord.v,
                r.value,
                opt(r.plus),
                opt(r.minus)
            )?;
        } else {
            writeln!(w, "{},{},{:?}", r.coord.u, r.coord.v, r.value)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_measurements(path: &Path) -> Result<MeasurementFile> {
    let (line, reader) = read_first_line(path)?;
    let h = Header::parse(path, &line, "measurements")?;
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut records = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let bad = || Error::format(path, format!("bad row {:?}", rec));
        let u = rec.get(0).and_then(|s| s.parse().ok()).ok_or_else(bad)?;
        let v = rec.get(1).and_then(|s| s.parse().ok()).ok_or_else(bad)?;
        let b = rec.get(2).and_then(|s| s.parse().ok()).ok_or_else(bad)?;
        let component = |i: usize| -> Result<Option<f64>> {
            match rec.get(i) {
                None | Some("") => Ok(None),
                Some(t) => t.parse().map(Some).map_err(|_| bad()),
            }
        };
        records.push(MeasurementRecord {
            plus: component(3)?,
            minus: component(4)?,
            ..MeasurementRecord::new(SpectralCoord::new(u, v), b)
        });
    }
    Ok(MeasurementFile {
        width: h.parse_field("width")?,
        height: h.parse_field("height")?,
        object_digest: h.raw("object_digest")?.to_string(),
        samples_digest: h.raw("samples_digest")?.to_string(),
        noise: NoiseSpec {
            object_sigma_rel: h.parse_field("noise_object")?,
            measurement_sigma_rel: h.parse_field("noise_measurement")?,
            seed: h.parse_field("seed")?,
        },
        records,
    })
}

/// Digest of a sample set's identity (dims, ratio, draw and selection).
pub fn samples_digest(s: &SampleSet) -> String {
    let mut h = crate::digest::Hasher::new();
    h.u64(s.width() as u64)
        .u64(s.height() as u64)
        .f64(s.sampling_ratio())
        .str(s.order_digest());
    if let Some(p) = s.pf() {
        h.f64(p.a).u64(p.seed);
    }
    h.coords(s.selected());
    h.finish_hex()
}

// ---------------------------------------------------------------------------
// graymaps

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BitDepth {
    Eight,
    Sixteen,
}

/// Binary PGM (P5). Values are rounded and clamped to `[0, maxval]`, where
/// `maxval` is 255 or 65535 and pixel values are scaled by `maxval / peak`.
pub fn write_pgm(img: &ImageBuffer, path: &Path, depth: BitDepth) -> Result<()> {
    let maxval: u32 = match depth {
        BitDepth::Eight => 255,
        BitDepth::Sixteen => 65535,
    };
    let peak = if img.peak() > 0.0 { img.peak() } else { 255.0 };
    let scale = maxval as f64 / peak;
    let mut buf = format!("P5\n{} {}\n{}\n", img.width(), img.height(), maxval).into_bytes();
    for &v in img.as_slice() {
        let q = (v * scale).round().clamp(0.0, maxval as f64) as u32;
        match depth {
            BitDepth::Eight => buf.push(q as u8),
            BitDepth::Sixteen => buf.extend_from_slice(&(q as u16).to_be_bytes()),
        }
    }
    std::fs::write(path, buf)?;
    Ok(())
}

/// Reads a binary PGM; samples are rescaled to `[0, 255]` and peak is 255.
pub fn read_pgm(path: &Path) -> Result<ImageBuffer> {
    let bytes = std::fs::read(path)?;
    decode_pgm(path, &bytes)
}

pub(crate) fn decode_pgm(path: &Path, bytes: &[u8]) -> Result<ImageBuffer> {
    let mut pos = 0;
    let mut token = || -> Result<String> {
        loop {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if pos < bytes.len() && bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
                continue;
            }
            break;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(Error::format(path, "truncated PGM header"));
        }
        Ok(String::from_utf8_lossy(&bytes[start..pos]).into_owned())
    };
    if token()? != "P5" {
        return Err(Error::format(path, "not a binary graymap (P5)"));
    }
    let num = |t: String| -> Result<usize> {
        t.parse()
            .map_err(|_| Error::format(path, format!("bad PGM header value '{t}'")))
    };
    let width = num(token()?)?;
    let height = num(token()?)?;
    let maxval = num(token()?)?;
    if maxval == 0 || maxval > 65535 {
        return Err(Error::format(path, format!("unsupported maxval {maxval}")));
    }
    // single whitespace byte after maxval
    pos += 1;
    let bpp = if maxval < 256 { 1 } else { 2 };
    let need = width * height * bpp;
    let raster = bytes
        .get(pos..pos + need)
        .ok_or_else(|| Error::format(path, "truncated PGM raster"))?;
    let scale = 255.0 / maxval as f64;
    let data: Vec<f64> = if bpp == 1 {
        raster.iter().map(|&b| b as f64 * scale).collect()
    } else {
        raster
            .chunks_exact(2)
            .map(|c| u16::from_be_bytes([c[0], c[1]]) as f64 * scale)
            .collect()
    };
    ImageBuffer::from_vec(width, height, data, 255.0)
}

/// 8-bit grayscale PNG, same scaling as [`write_pgm`].
pub fn write_png(img: &ImageBuffer, path: &Path) -> Result<()> {
    let peak = if img.peak() > 0.0 { img.peak() } else { 255.0 };
    let px: Vec<u8> = img
        .as_slice()
        .iter()
        .map(|&v| (v * 255.0 / peak).round().clamp(0.0, 255.0) as u8)
        .collect();
    let buf = image::GrayImage::from_raw(img.width() as u32, img.height() as u32, px)
        .ok_or_else(|| Error::Dimension("image too large for PNG".into()))?;
    buf.save_with_format(path, image::ImageFormat::Png)?;
    Ok(())
}

/// Writes by extension: `.png` as PNG, anything else as 8-bit PGM.
pub fn write_image(img: &ImageBuffer, path: &Path) -> Result<()> {
    match path.extension().and_then(|e| e.to_str()) {
        Some(e) if e.eq_ignore_ascii_case("png") => write_png(img, path),
        _ => write_pgm(img, path, BitDepth::Eight),
    }
}

/// Writes a JSON value with a trailing newline.
pub fn write_json<T: serde::Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}
