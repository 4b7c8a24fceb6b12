//! Regularization by convolution with the even bump kernel, and cubic-spline
//! interpolation of tabulated functions.

use std::sync::OnceLock;

use serde::Serialize;

use crate::error::{Error, Result};

/// Default number of Simpson panels on `[-1, 1]`.
pub const DEFAULT_PANELS: usize = 512;
const NORMALIZATION_PANELS: usize = 1 << 14;

fn bump(x: f64) -> f64 {
    if x.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - x * x)).exp()
    }
}

/// Composite Simpson rule on `[a, b]` with `panels` (even) subintervals.
pub fn simpson(g: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let m = panels + panels % 2;
    let h = (b - a) / m as f64;
    let mut s = g(a) + g(b);
    for k in 1..m {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        s += w * g(a + h * k as f64);
    }
    s * h / 3.0
}

/// `1/∫ exp(-1/(1-x²))`, computed once.
fn normalization() -> f64 {
    static C: OnceLock<f64> = OnceLock::new();
    *C.get_or_init(|| 1.0 / simpson(bump, -1.0, 1.0, NORMALIZATION_PANELS))
}

/// `φ(x) = c·exp(-1/(1-x²))` on `(-1, 1)`, zero elsewhere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MollifierKernel {
    pub c: f64,
    pub panels: usize,
}

impl Default for MollifierKernel {
    fn default() -> Self {
        MollifierKernel::with_panels(DEFAULT_PANELS).expect("default panel count is valid")
    }
}

impl MollifierKernel {
    pub fn with_panels(panels: usize) -> Result<Self> {
        if panels < 2 || panels % 2 == 1 {
            return Err(Error::InvalidInput("panel count must be even and at least 2".into()));
        }
        Ok(MollifierKernel {
            c: normalization(),
            panels,
        })
    }

    pub fn phi(&self, x: f64) -> f64 {
        self.c * bump(x)
    }

    /// `∫ φ(s) g(s) ds` over `[-1, 1]`. The endpoints carry zero weight, so
    /// `g` is only evaluated at interior nodes.
    pub fn integrate(&self, g: impl Fn(f64) -> Result<f64>) -> Result<f64> {
        let m = self.panels;
        let h = 2.0 / m as f64;
        let mut s = 0.0;
        for k in 1..m {
            let x = -1.0 + h * k as f64;
            let w = if k % 2 == 1 { 4.0 } else { 2.0 };
            s += w * self.phi(x) * g(x)?;
        }
        Ok(s * h / 3.0)
    }

    /// `f_ε(t) = ∫ φ(s) f(t - εs) ds` for `f` defined on `(a, b)`.
    pub fn eval(&self, f: impl Fn(f64) -> Result<f64>, domain: (f64, f64), eps: f64, t: f64) -> Result<f64> {
        let (a, b) = domain;
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::InvalidInput(format!("epsilon must be positive, got {eps}")));
        }
        if !(t > a + eps && t < b - eps) {
            return Err(Error::OutsideDomain {
                t,
                domain: format!("({}, {})", a + eps, b - eps),
            });
        }
        self.integrate(|s| f(t - eps * s))
    }
}

/// Mollified value with the default kernel.
pub fn mollify_eval(f: impl Fn(f64) -> Result<f64>, domain: (f64, f64), eps: f64, t: f64) -> Result<f64> {
    MollifierKernel::default().eval(f, domain, eps, t)
}

/// Reads a two-column `t, f(t)` table with strictly increasing `t`. A header
/// row is allowed.
pub fn parse_table(text: &str) -> Result<Vec<(f64, f64)>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut rows: Vec<(f64, f64)> = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        if record.len() != 2 {
            return Err(Error::InvalidInput(format!(
                "row {}: expected 2 columns, found {}",
                line + 1,
                record.len()
            )));
        }
        let parsed = (record[0].parse::<f64>(), record[1].parse::<f64>());
        match parsed {
            (Ok(t), Ok(v)) => {
                if !(t.is_finite() && v.is_finite()) {
                    return Err(Error::InvalidInput(format!("row {}: non-finite value", line + 1)));
                }
                if let Some(&(prev, _)) = rows.last() {
                    if t <= prev {
                        return Err(Error::InvalidInput(format!(
                            "row {}: t must be strictly increasing",
                            line + 1
                        )));
                    }
                }
                rows.push((t, v));
            }
            _ if line == 0 => continue,
            _ => return Err(Error::InvalidInput(format!("row {}: not a number", line + 1))),
        }
    }
    if rows.len() < 2 {
        return Err(Error::InvalidInput("a table needs at least two rows".into()));
    }
    Ok(rows)
}

/// Natural cubic spline through tabulated points.
#[derive(Debug, Clone, PartialEq)]
pub struct CubicSpline {
    t: Vec<f64>,
    y: Vec<f64>,
    /// Second derivatives at the knots.
    m: Vec<f64>,
}

impl CubicSpline {
    pub fn new(points: &[(f64, f64)]) -> Result<Self> {
        let n = points.len();
        if n < 2 {
            return Err(Error::InvalidInput("a spline needs at least two points".into()));
        }
        let t: Vec<f64> = points.iter().map(|p| p.0).collect();
        let y: Vec<f64> = points.iter().map(|p| p.1).collect();
        if t.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput("knots must be strictly increasing".into()));
        }
        let mut m = vec![0.0; n];
        if n > 2 {
            // tridiagonal system for the interior second derivatives
            let k = n - 2;
            let h: Vec<f64> = t.windows(2).map(|w| w[1] - w[0]).collect();
            let mut diag: Vec<f64> = (0..k).map(|i| 2.0 * (h[i] + h[i + 1])).collect();
            let mut rhs: Vec<f64> = (0..k)
                .map(|i| 6.0 * ((y[i + 2] - y[i + 1]) / h[i + 1] - (y[i + 1] - y[i]) / h[i]))
                .collect();
            for i in 1..k {
                let w = h[i] / diag[i - 1];
                diag[i] -= w * h[i];
                rhs[i] -= w * rhs[i - 1];
            }
            m[k] = rhs[k - 1] / diag[k - 1];
            for i in (0..k - 1).rev() {
                m[i + 1] = (rhs[i] - h[i + 1] * m[i + 2]) / diag[i];
            }
        }
        Ok(CubicSpline { t, y, m })
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.t[0], *self.t.last().expect("nonempty"))
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        let (a, b) = self.domain();
        if !(x >= a && x <= b) {
            return Err(Error::OutsideDomain {
                t: x,
                domain: format!("[{a}, {b}]"),
            });
        }
        let i = match self.t.partition_point(|&k| k <= x) {
            0 => 0,
            p => (p - 1).min(self.t.len() - 2),
        };
        let h = self.t[i + 1] - self.t[i];
        let u = (self.t[i + 1] - x) / h;
        let v = (x - self.t[i]) / h;
        Ok(u * self.y[i]
            + v * self.y[i + 1]
            + ((u * u * u - u) * self.m[i] + (v * v * v - v) * self.m[i + 1]) * h * h / 6.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MollifiedSample {
    pub t: f64,
    pub f: f64,
    pub f_eps: f64,
}

/// `f` and `f_ε` on `grid` equispaced points strictly inside the shrunk
/// interval of the spline through `table`.
pub fn mollify_table(table: &[(f64, f64)], eps: f64, grid: usize) -> Result<Vec<MollifiedSample>> {
    if grid == 0 {
        return Err(Error::InvalidInput("grid must have at least one point".into()));
    }
    let spline = CubicSpline::new(table)?;
    let (a, b) = spline.domain();
    let (lo, hi) = (a + eps, b - eps);
    if eps.is_nan() || eps <= 0.0 || lo >= hi {
        return Err(Error::InvalidInput(format!(
            "epsilon {eps} leaves no interior of [{a}, {b}]"
        )));
    }
    let kernel = MollifierKernel::default();
    (1..=grid)
        .map(|k| {
            let t = lo + (hi - lo) * k as f64 / (grid + 1) as f64;
            Ok(MollifiedSample {
                t,
                f: spline.eval(t)?,
                f_eps: kernel.eval(|x| spline.eval(x), (a, b), eps, t)?,
            })
        })
        .collect()
}
