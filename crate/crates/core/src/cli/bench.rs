//! Wall-clock generation time of the CC, TV and XY orders.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::ordering::{cc_order_with, tv_order_with, xy_order, StatMethod};
use crate::transform::require_pow2;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub sizes: Vec<usize>,
    pub runs: usize,
    /// Largest size for which the flood-fill CC path is timed; larger sizes
    /// report no CC time.
    pub cc_max_size: Option<usize>,
    pub cc_method: StatMethodName,
    pub tv_method: StatMethodName,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            sizes: vec![64, 128, 256],
            runs: 5,
            cc_max_size: None,
            cc_method: StatMethodName::BruteForce,
            tv_method: StatMethodName::Factored,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StatMethodName {
    ClosedForm,
    Factored,
    BruteForce,
}

impl From<StatMethodName> for StatMethod {
    fn from(m: StatMethodName) -> Self {
        match m {
            StatMethodName::ClosedForm => StatMethod::ClosedForm,
            StatMethodName::Factored => StatMethod::Factored,
            StatMethodName::BruteForce => StatMethod::BruteForce,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub size: usize,
    pub cc_s: Option<f64>,
    pub tv_s: f64,
    pub xy_s: f64,
}

fn median_seconds(runs: usize, mut f: impl FnMut() -> Result<()>) -> Result<f64> {
    let mut times = Vec::with_capacity(runs);
    for _ in 0..runs.max(1) {
        let t = Instant::now();
        f()?;
        times.push(t.elapsed().as_secs_f64());
    }
    times.sort_by(f64::total_cmp);
    Ok(times[times.len() / 2])
}

/// Median of `runs` generation times per order and size.
pub fn bench_orders(cfg: &BenchConfig) -> Result<Vec<BenchRow>> {
    let mut rows = Vec::with_capacity(cfg.sizes.len());
    for &n in &cfg.sizes {
        require_pow2(n, "size")?;
        let cc_s = if cfg.cc_max_size.is_none_or(|m| n <= m) {
            Some(median_seconds(cfg.runs, || {
                cc_order_with(n, n, cfg.cc_method.into()).map(drop)
            })?)
        } else {
            None
        };
        let tv_s = median_seconds(cfg.runs, || tv_order_with(n, n, cfg.tv_method.into()).map(drop))?;
        let xy_s = median_seconds(cfg.runs, || xy_order(n, n).map(drop))?;
        log::info!("{n}x{n}: cc {cc_s:?} s, tv {tv_s} s, xy {xy_s} s");
        rows.push(BenchRow {
            size: n,
            cc_s,
            tv_s,
            xy_s,
        });
    }
    Ok(rows)
}

/// Table layout: one line per method, one column per size.
pub fn bench_csv(rows: &[BenchRow]) -> String {
    let mut s = String::from("method");
    for r in rows {
        s.push_str(&format!(",{}x{}", r.size, r.size));
    }
    s.push('\n');
    let fmt = |v: Option<f64>| v.map(|t| format!("{t:.6}")).unwrap_or_default();
    for (name, get) in [
        ("CC", Box::new(|r: &BenchRow| r.cc_s) as Box<dyn Fn(&BenchRow) -> Option<f64>>),
        ("TV", Box::new(|r: &BenchRow| Some(r.tv_s))),
        ("XY", Box::new(|r: &BenchRow| Some(r.xy_s))),
    ] {
        s.push_str(name);
        for r in rows {
            s.push(',');
            s.push_str(&fmt(get(r)));
        }
        s.push('\n');
    }
    s
}
