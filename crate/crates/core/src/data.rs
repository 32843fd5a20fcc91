//! Synthetic 2-D targets, IDX image ingestion, and CSV persistence.
//!
//! The three 2-D generators are fixed instantiations (means, spreads and
//! rotation rates are part of this artifact, chosen so modes are well
//! separated relative to the component scale):
//!
//! - `mog4`: equal-weight Gaussians at (±2, ±2) with std 0.3; exposes an
//!   exact log-density for evaluation.
//! - `bananas4`: four 90°-rotated copies of the banana map
//!   b(z) = (z₁, z₂ + 0.5 z₁² − 1) applied to N(0, diag(1, 0.25)), scaled by
//!   0.7 and translated to radius 2.
//! - `pinwheel`: five Gaussian arms (std 0.3 radial, 0.05 tangential) at
//!   radius 2, twisted by 0.3 rad per unit radius.

use crate::error::{HeeError, Result};
use crate::rng::Rng;
use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::io::Read;
use std::path::Path;

pub type Point2 = [f64; 2];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Generator2D {
    Mog4,
    Bananas4,
    Pinwheel,
}

#[derive(Debug, Clone)]
pub struct Dataset2D {
    pub points: Vec<Point2>,
    pub generator: Generator2D,
    pub seed: u64,
}

impl Dataset2D {
    pub fn generate(generator: Generator2D, n: usize, seed: u64) -> Self {
        let mut rng = crate::rng::stream(seed, crate::rng::Domain::Data, 0);
        let points = match generator {
            Generator2D::Mog4 => gen_mog4(n, &mut rng),
            Generator2D::Bananas4 => gen_bananas4(n, &mut rng),
            Generator2D::Pinwheel => gen_pinwheel(n, &mut rng),
        };
        Self { points, generator, seed }
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.points.iter().map(|p| p.to_vec()).collect()
    }
}

// ---------------------------------------------------------------------------
// Isotropic Gaussian mixtures (MoG4 and the sampler-bench target)
// ---------------------------------------------------------------------------

/// Equal-weight isotropic 2-D Gaussian mixture with exact log-density and
/// score. Doubles as the bundled non-convex energy for sampler benches.
#[derive(Debug, Clone)]
pub struct GaussianMixture2D {
    pub means: Vec<Point2>,
    pub std: f64,
}

impl GaussianMixture2D {
    /// The figure-4 target: modes at (±2, ±2), std 0.3.
    pub fn mog4() -> Self {
        Self { means: vec![[2.0, 2.0], [-2.0, 2.0], [-2.0, -2.0], [2.0, -2.0]], std: 0.3 }
    }

    /// The bundled bench energy: four wide modes with
    /// moderate barriers, so barrier crossings happen on desk-scale budgets
    /// while plain Langevin still visibly stalls.
    pub fn bench() -> Self {
        Self { means: vec![[2.5, 2.5], [-2.5, 2.5], [-2.5, -2.5], [2.5, -2.5]], std: 0.75 }
    }

    pub fn sample(&self, n: usize, rng: &mut Rng) -> Vec<Point2> {
        let k = self.means.len();
        (0..n)
            .map(|_| {
                let c = rng.gen_range(0..k);
                let z1: f64 = rng.sample(StandardNormal);
                let z2: f64 = rng.sample(StandardNormal);
                [self.means[c][0] + self.std * z1, self.means[c][1] + self.std * z2]
            })
            .collect()
    }

    pub fn log_density(&self, p: Point2) -> f64 {
        let s2 = self.std * self.std;
        let log_norm = -( (2.0 * std::f64::consts::PI * s2).ln() );
        let log_w = -(self.means.len() as f64).ln();
        let mut best = f64::NEG_INFINITY;
        let exps: Vec<f64> = self
            .means
            .iter()
            .map(|m| {
                let d2 = (p[0] - m[0]) * (p[0] - m[0]) + (p[1] - m[1]) * (p[1] - m[1]);
                let e = log_w + log_norm - 0.5 * d2 / s2;
                if e > best {
                    best = e;
                }
                e
            })
            .collect();
        best + exps.iter().map(|e| (e - best).exp()).sum::<f64>().ln()
    }

    /// ∇ ln p — the drift of a Langevin chain targeting this mixture.
    pub fn grad_log_density(&self, p: &[f64]) -> Vec<f64> {
        let s2 = self.std * self.std;
        let mut best = f64::NEG_INFINITY;
        let es: Vec<f64> = self
            .means
            .iter()
            .map(|m| {
                let d2 = (p[0] - m[0]) * (p[0] - m[0]) + (p[1] - m[1]) * (p[1] - m[1]);
                let e = -0.5 * d2 / s2;
                if e > best {
                    best = e;
                }
                e
            })
            .collect();
        let mut wsum = 0.0;
        let mut gx = 0.0;
        let mut gy = 0.0;
        for (m, &e) in self.means.iter().zip(&es) {
            let w = (e - best).exp();
            wsum += w;
            gx += w * (m[0] - p[0]) / s2;
            gy += w * (m[1] - p[1]) / s2;
        }
        vec![gx / wsum, gy / wsum]
    }
}

/// Equal-weight mixture at (±2, ±2), std 0.3.
pub fn gen_mog4(n: usize, rng: &mut Rng) -> Vec<Point2> {
    GaussianMixture2D::mog4().sample(n, rng)
}

/// Exact MoG4 log-density (used for KL evaluation).
pub fn mog4_log_density(p: Point2) -> f64 {
    GaussianMixture2D::mog4().log_density(p)
}

pub fn mog4_modes() -> Vec<Point2> {
    GaussianMixture2D::mog4().means
}

pub const MOG4_STD: f64 = 0.3;

/// Four rotated bananas.
pub fn gen_bananas4(n: usize, rng: &mut Rng) -> Vec<Point2> {
    (0..n)
        .map(|_| {
            let arm = rng.gen_range(0..4u32);
            let z1: f64 = rng.sample(StandardNormal);
            let z2: f64 = rng.sample::<f64, _>(StandardNormal) * 0.5; // var 0.25
            // banana map, scale, translate out, then rotate into the arm
            let bx = 0.7 * z1 + 2.0;
            let by = 0.7 * (z2 + 0.5 * z1 * z1 - 1.0);
            let ang = std::f64::consts::FRAC_PI_2 * arm as f64;
            let (c, s) = (ang.cos(), ang.sin());
            [c * bx - s * by, s * bx + c * by]
        })
        .collect()
}

/// Five-arm pinwheel: radial/tangential Gaussian at radius 2, twisted by
/// 0.3 rad per unit radius.
pub fn gen_pinwheel(n: usize, rng: &mut Rng) -> Vec<Point2> {
    const ARMS: usize = 5;
    const RADIUS: f64 = 2.0;
    const RATE: f64 = 0.3;
    (0..n)
        .map(|_| {
            let arm = rng.gen_range(0..ARMS);
            let r = RADIUS + 0.3 * rng.sample::<f64, _>(StandardNormal);
            let t = 0.05 * rng.sample::<f64, _>(StandardNormal);
            let ang = 2.0 * std::f64::consts::PI * arm as f64 / ARMS as f64 + RATE * r;
            let (c, s) = (ang.cos(), ang.sin());
            [c * r - s * t, s * r + c * t]
        })
        .collect()
}

// ---------------------------------------------------------------------------
// IDX ingestion
// ---------------------------------------------------------------------------

const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;
const IDX_LABELS_MAGIC: u32 = 0x0000_0801;

#[derive(Debug)]
pub struct IdxImages {
    /// Row-major pixels scaled to [0, 1], one row per image.
    pub images: Vec<Vec<f64>>,
    pub labels: Vec<u8>,
    pub rows: usize,
    pub cols: usize,
}

fn read_maybe_gzip(path: &Path) -> Result<Vec<u8>> {
    let raw = std::fs::read(path)?;
    if raw.len() >= 2 && raw[0] == 0x1f && raw[1] == 0x8b {
        let mut out = Vec::new();
        flate2::read::GzDecoder::new(&raw[..]).read_to_end(&mut out)?;
        Ok(out)
    } else {
        Ok(raw)
    }
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
    path: &'a Path,
}

impl<'a> Cursor<'a> {
    fn u32_be(&mut self) -> Result<u32> {
        if self.pos + 4 > self.buf.len() {
            return Err(HeeError::TruncatedFile(format!("{} at offset {}", self.path.display(), self.pos)));
        }
        let v = u32::from_be_bytes(self.buf[self.pos..self.pos + 4].try_into().unwrap());
        self.pos += 4;
        Ok(v)
    }

    fn bytes(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.buf.len() {
            return Err(HeeError::TruncatedFile(format!("{} at offset {}", self.path.display(), self.pos)));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }
}

/// Load an IDX image/label pair (gzip or raw), honoring `limit` when given.
/// Pixels are scaled to [0, 1].
pub fn load_idx(images_path: &Path, labels_path: &Path, limit: Option<usize>) -> Result<IdxImages> {
    let img_buf = read_maybe_gzip(images_path)?;
    let mut cur = Cursor { buf: &img_buf, pos: 0, path: images_path };
    let magic = cur.u32_be()?;
    if magic != IDX_IMAGES_MAGIC {
        return Err(HeeError::BadMagic { expected: IDX_IMAGES_MAGIC, got: magic });
    }
    let count = cur.u32_be()? as usize;
    let rows = cur.u32_be()? as usize;
    let cols = cur.u32_be()? as usize;
    let take = limit.map_or(count, |l| l.min(count));
    let mut images = Vec::with_capacity(take);
    for _ in 0..take {
        let px = cur.bytes(rows * cols)?;
        images.push(px.iter().map(|&b| b as f64 / 255.0).collect());
    }

    let lab_buf = read_maybe_gzip(labels_path)?;
    let mut cur = Cursor { buf: &lab_buf, pos: 0, path: labels_path };
    let magic = cur.u32_be()?;
    if magic != IDX_LABELS_MAGIC {
        return Err(HeeError::BadMagic { expected: IDX_LABELS_MAGIC, got: magic });
    }
    let lab_count = cur.u32_be()? as usize;
    if lab_count != count {
        return Err(HeeError::DimensionMismatch(format!(
            "{count} images vs {lab_count} labels"
        )));
    }
    let labels = cur.bytes(take)?.to_vec();
    Ok(IdxImages { images, labels, rows, cols })
}

// ---------------------------------------------------------------------------
// CSV persistence
// ---------------------------------------------------------------------------

/// Write rows as CSV with a one-line `x0,x1,...` header. Floats use the
/// shortest round-trip form, so identical values give identical bytes.
pub fn write_rows_csv(path: &Path, rows: &[Vec<f64>]) -> Result<()> {
    let width = rows.first().map_or(0, |r| r.len());
    let mut out = String::new();
    let header: Vec<String> = (0..width).map(|i| format!("x{i}")).collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Read a numeric CSV, skipping one header line if the first field does not
/// parse as a number.
pub fn read_rows_csv(path: &Path) -> Result<Vec<Vec<f64>>> {
    let body = std::fs::read_to_string(path)?;
    let mut rows = Vec::new();
    for (lineno, line) in body.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut row = Vec::new();
        let mut ok = true;
        for field in line.split(',') {
            match field.trim().parse::<f64>() {
                Ok(v) => row.push(v),
                Err(_) => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            if lineno == 0 {
                continue; // header
            }
            return Err(HeeError::DimensionMismatch(format!(
                "{}:{}: non-numeric field",
                path.display(),
                lineno + 1
            )));
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Reinterpret generic rows as 2-D points.
pub fn as_points2(rows: &[Vec<f64>]) -> Result<Vec<Point2>> {
    rows.iter()
        .map(|r| {
            if r.len() == 2 {
                Ok([r[0], r[1]])
            } else {
                Err(HeeError::DimensionMismatch(format!("expected 2 columns, got {}", r.len())))
            }
        })
        .collect()
}
