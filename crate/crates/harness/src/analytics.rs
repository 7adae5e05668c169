//! Relative errors between a lattice and its 2× refinement, and the
//! observed convergence order.

use ecb_pricing::pde::Lattice;
use ecb_pricing::PricingError;

use crate::HarnessError;

/// Errors of one level `h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelError {
    pub r: f64,
    pub e1: f64,
    pub einf: f64,
}

/// Errors of one ladder rung against its refinement.
#[derive(Debug, Clone, PartialEq)]
pub struct RungErrors {
    pub label: String,
    /// `max_h` of the per-level relative l¹ error.
    pub e1: f64,
    /// `max_h` of the per-level relative l∞ error.
    pub einf: f64,
    pub profile: Vec<LevelError>,
    /// Some level had a zero denominator.
    pub degenerate: bool,
}

/// Compares `coarse` on `(N, J)` with `fine` on `(2N, 2J)`; coarse node `j`
/// sits on fine node `2j`. `rates[h−1]` labels level `h` in the profile.
pub fn relative_errors(label: &str, coarse: &Lattice, fine: &Lattice, rates: &[f64]) -> Result<RungErrors, HarnessError> {
    let j_count = coarse.width() - 1;
    if fine.width() - 1 != 2 * j_count || fine.levels() != coarse.levels() {
        return Err(PricingError::Config(format!(
            "fine lattice ({} levels, J = {}) is not the 2x refinement of ({} levels, J = {j_count})",
            fine.levels(),
            fine.width() - 1,
            coarse.levels()
        ))
        .into());
    }
    let mut profile = Vec::with_capacity(coarse.levels());
    let mut degenerate = false;
    for h in 1..=coarse.levels() {
        let (c, f) = (coarse.row(h), fine.row(h));
        let mut diff1 = 0.0;
        let mut norm1 = 0.0;
        let mut diffinf: f64 = 0.0;
        let mut norminf: f64 = 0.0;
        for (j, cv) in c.iter().enumerate() {
            let fv = f[2 * j];
            let d = (cv - fv).abs();
            diff1 += d;
            norm1 += fv.abs();
            diffinf = diffinf.max(d);
            norminf = norminf.max(fv.abs());
        }
        let mut ratio = |num: f64, den: f64| {
            if den > 0.0 {
                num / den
            } else {
                degenerate = true;
                f64::NAN
            }
        };
        let e1 = ratio(diff1, norm1);
        let einf = ratio(diffinf, norminf);
        profile.push(LevelError {
            r: rates[h - 1],
            e1,
            einf,
        });
    }
    let max = |f: fn(&LevelError) -> f64| profile.iter().map(f).fold(0.0, f64::max);
    Ok(RungErrors {
        label: label.to_string(),
        e1: if degenerate { f64::NAN } else { max(|l| l.e1) },
        einf: if degenerate { f64::NAN } else { max(|l| l.einf) },
        profile,
        degenerate,
    })
}

/// `log₂(e_coarse / e_fine)`; `None` unless both errors are positive.
pub fn convergence_order(e_coarse: f64, e_fine: f64) -> Option<f64> {
    (e_coarse > 0.0 && e_fine > 0.0).then(|| (e_coarse / e_fine).log2())
}

/// One row of `errors.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorRow {
    pub errors: RungErrors,
    /// Against the next rung's error at twice the resolution.
    pub order1: Option<f64>,
    pub orderinf: Option<f64>,
}

/// Rows for a ladder: `errors[k]` compares rung `k` with its refinement and
/// `doubled[k]` compares the refinement with its own refinement.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub rows: Vec<ErrorRow>,
}

impl ErrorReport {
    pub fn new(errors: Vec<RungErrors>, doubled: Vec<RungErrors>) -> Self {
        let rows = errors
            .into_iter()
            .zip(doubled)
            .map(|(e, d)| ErrorRow {
                order1: convergence_order(e.e1, d.e1),
                orderinf: convergence_order(e.einf, d.einf),
                errors: e,
            })
            .collect();
        Self { rows }
    }

    pub const CSV_HEADER: &'static str = "rung,e1,order1,einf,orderinf";

    pub fn to_csv(&self) -> String {
        let fmt_opt = |o: Option<f64>| o.map(|x| format!("{x:.6}")).unwrap_or_default();
        let mut out = format!("{}\n", Self::CSV_HEADER);
        for row in &self.rows {
            out.push_str(&format!(
                "{},{:.6e},{},{:.6e},{}\n",
                row.errors.label,
                row.errors.e1,
                fmt_opt(row.order1),
                row.errors.einf,
                fmt_opt(row.orderinf)
            ));
        }
        out
    }
}

/// `error_profile.csv` contents for one rung.
pub fn profile_csv(errors: &RungErrors) -> String {
    let mut out = String::from("r_h,e1_h,einf_h\n");
    for l in &errors.profile {
        out.push_str(&format!("{},{:.6e},{:.6e}\n", l.r, l.e1, l.einf));
    }
    out
}
