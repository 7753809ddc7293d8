//! Grid-refinement studies.

use std::path::Path;

use anyhow::{bail, Result};
use serde::Serialize;

use crate::config::Config;
use crate::io;
use crate::run::{simulate, write_outputs, RunRecord};
use crate::scenario::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    /// residuals at round-off on the finest level
    RoundOff,
    /// finer residual not smaller; the order is NaN
    NonMonotone,
    Fail,
}

impl Verdict {
    pub fn passed(self) -> bool {
        matches!(self, Verdict::Pass | Verdict::RoundOff)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OrderRow {
    pub name: String,
    pub variant: Option<String>,
    pub side: Option<String>,
    /// L2 norm per level, coarsest first
    pub l2: Vec<f64>,
    pub linf: Vec<f64>,
    /// `log2(r_h / r_{h/2})` per consecutive pair; NaN when undefined
    pub orders: Vec<f64>,
    pub floor: f64,
    pub verdict: Verdict,
}

impl OrderRow {
    pub fn label(&self) -> String {
        let mut s = self.name.clone();
        for p in [&self.variant, &self.side].into_iter().flatten() {
            s.push('/');
            s.push_str(p);
        }
        s
    }

    /// Order of the finest pair.
    pub fn finest_order(&self) -> f64 {
        self.orders.last().copied().unwrap_or(f64::NAN)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OrderTable {
    pub n: Vec<usize>,
    pub rows: Vec<OrderRow>,
    pub warnings: Vec<String>,
}

impl OrderTable {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.verdict.passed())
    }

    pub fn row(&self, name: &str, variant: Option<&str>) -> Option<&OrderRow> {
        self.rows
            .iter()
            .find(|r| r.name == name && (variant.is_none() || r.variant.as_deref() == variant))
    }

    pub fn render(&self) -> String {
        let mut out = format!("{:<34}", "identity");
        for n in &self.n {
            out.push_str(&format!(" {:>11}", format!("L2@{n}")));
        }
        for w in self.n.windows(2) {
            out.push_str(&format!(" {:>9}", format!("p{}-{}", w[0], w[1])));
        }
        out.push_str(&format!(" {:>6} {}\n", "floor", "verdict"));
        for r in &self.rows {
            out.push_str(&format!("{:<34}", r.label()));
            for v in &r.l2 {
                out.push_str(&format!(" {v:>11.3e}"));
            }
            for p in &r.orders {
                out.push_str(&format!(" {p:>9.3}"));
            }
            let verdict = match r.verdict {
                Verdict::Pass => "pass",
                Verdict::RoundOff => "pass (round-off)",
                Verdict::NonMonotone => "non-monotone",
                Verdict::Fail => "FAIL",
            };
            out.push_str(&format!(" {:>6} {verdict}\n", r.floor));
        }
        for w in &self.warnings {
            out.push_str(&format!("warning: {w}\n"));
        }
        out
    }
}

/// Observed orders from final-time reports of runs at successive resolutions.
///
/// A row is round-off when its finest residual is below `noise_floor` times
/// the field scale. A pair whose finer residual is not smaller gets order NaN
/// and a warning; with a positive floor the row then fails.
pub fn order_table(scenario: &Scenario, records: &[RunRecord]) -> Result<OrderTable> {
    let Some(first) = records.first() else {
        bail!("no levels")
    };
    let mut rows = Vec::new();
    let mut warnings = Vec::new();
    let scales = records
        .iter()
        .map(|r| r.last.state.scale(&scenario.eos))
        .collect::<mhd_invariants::Result<Vec<_>>>()?;
    for base in first.final_reports() {
        let matches: Vec<_> = records
            .iter()
            .map(|rec| {
                rec.final_reports()
                    .find(|r| r.name == base.name && r.variant == base.variant && r.side == base.side)
            })
            .collect();
        let Some(found) = matches.into_iter().collect::<Option<Vec<_>>>() else {
            warnings.push(format!("{} is missing on some level", base.name));
            continue;
        };
        let l2: Vec<f64> = found.iter().map(|r| r.norms.l2).collect();
        let linf: Vec<f64> = found.iter().map(|r| r.norms.linf).collect();
        let mut row = OrderRow {
            name: base.name.clone(),
            variant: base.variant.clone(),
            side: base.side.clone(),
            orders: Vec::new(),
            floor: 0.0,
            verdict: Verdict::Pass,
            l2,
            linf,
        };
        row.floor = floor_for(scenario, &row);
        let fine = *row.l2.last().expect("levels");
        let round_off = fine <= scenario.noise_floor * scales.last().copied().unwrap_or(1.0);
        let mut non_monotone = false;
        for (i, w) in row.l2.windows(2).enumerate() {
            let noise = scenario.noise_floor * scales[i + 1];
            let p = if w[1] <= noise {
                f64::NAN
            } else if w[1] >= w[0] {
                non_monotone = true;
                f64::NAN
            } else {
                (w[0] / w[1]).log2()
            };
            row.orders.push(p);
        }
        row.verdict = if round_off {
            Verdict::RoundOff
        } else if non_monotone {
            warnings.push(format!("{}: residual does not decrease under refinement", row.label()));
            if row.floor > 0.0 {
                Verdict::Fail
            } else {
                Verdict::NonMonotone
            }
        } else if row.finest_order() < row.floor {
            Verdict::Fail
        } else {
            Verdict::Pass
        };
        rows.push(row);
    }
    Ok(OrderTable {
        n: records.iter().map(|r| r.scenario.grid.n[0]).collect(),
        rows,
        warnings,
    })
}

fn floor_for(scenario: &Scenario, row: &OrderRow) -> f64 {
    if let Some(v) = &row.variant {
        if let Some(f) = scenario.floors.get(&format!("{}/{v}", row.name)) {
            return *f;
        }
    }
    scenario.floor_for(&row.name)
}

/// Runs at `n, 2n, 4n, ...`, each level writing to its own directory.
pub fn convergence_study(scenario: &Scenario, config_hash: &str, levels: usize, out: Option<&Path>) -> Result<(OrderTable, Vec<RunRecord>)> {
    if levels < 3 {
        bail!("a convergence study needs at least 3 levels (got {levels})");
    }
    let mut records = Vec::with_capacity(levels);
    for i in 0..levels {
        let s = scenario.with_grid(scenario.grid.refined(1 << i));
        let rec = simulate(&s, config_hash)?;
        if let Some(dir) = out {
            write_outputs(&rec, &dir.join(format!("level-{i}-n{}", s.grid.n[0])))?;
        }
        records.push(rec);
    }
    let table = order_table(scenario, &records)?;
    if let Some(dir) = out {
        io::write_json(&dir.join("convergence.json"), &table)?;
    }
    Ok((table, records))
}

/// `convergence --config <path> --levels <k>`.
pub fn convergence(config_path: &Path, levels: usize, out: Option<&Path>) -> Result<OrderTable> {
    let config = Config::load(config_path)?;
    let scenario = Scenario::from_config(&config)?;
    let dir = out.map(Path::to_path_buf).unwrap_or_else(|| scenario.output.dir.clone());
    Ok(convergence_study(&scenario, &config.hash(), levels, Some(&dir))?.0)
}
