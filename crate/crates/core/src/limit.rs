//! Convergence of the relativistic solvers to their classical counterparts
//! as `c` grows.
//!
//! Every run in a study uses one common time step, the smallest stability
//! bound over all speeds and the classical baseline, so the deviation measures
//! the model difference and not a change of time discretization.

use crate::error::{Error, Result};
use crate::heat::{run_heat, stable_dt, HeatConfig};
use crate::kfp::{run_kfp, stability_bound, KfpConfig};
use crate::model::{SpeedOfLight, Variant};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub enum LimitSystem<T> {
    /// Relativistic heat equation against the linear heat equation.
    Heat(HeatConfig<T>),
    /// DH kinetic equation against classical Kramers.
    Kfp(KfpConfig<T>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitReport<T> {
    /// `(c, max_cells |ρ_c − ρ_classical|)` at the final time.
    pub rows: Vec<(T, T)>,
    pub dt: T,
    /// Deviations strictly decrease with `c`.
    pub monotone: bool,
}

impl<T: Real> LimitReport<T> {
    pub fn csv(&self) -> String {
        let mut out = String::from("c,deviation\n");
        for (c, d) in &self.rows {
            out.push_str(&format!("{:.16e},{:.16e}\n", c.as_f64(), d.as_f64()));
        }
        out
    }
}

fn max_diff<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |m, (&x, &y)| m.max((x - y).abs()))
}

fn check_speeds<T: Real>(speeds: &[T]) -> Result<()> {
    if speeds.is_empty() {
        return Err(Error::invalid("speeds", "need at least one speed of light"));
    }
    if speeds.iter().any(|c| !(c.is_finite() && *c > T::zero())) {
        return Err(Error::invalid("speeds", "speeds must be finite and positive"));
    }
    Ok(())
}

/// Runs the classical baseline and one relativistic run per speed.
///
/// The base configuration's own `dt` caps the common step.
pub fn run_limit_study<T: Real>(system: &LimitSystem<T>, speeds: &[T]) -> Result<LimitReport<T>> {
    check_speeds(speeds)?;
    let (dt, rows) = match system {
        LimitSystem::Heat(base) => {
            let with_c = |c| HeatConfig { params: base.params.with_c(c), ..base.clone() };
            let classical = with_c(SpeedOfLight::Infinite);
            let mut dt = base.dt.min(stable_dt(&base.grid, &classical.params));
            for &c in speeds {
                dt = dt.min(stable_dt(&base.grid, &base.params.with_c(SpeedOfLight::Finite(c))));
            }
            let reference = run_heat(&HeatConfig { dt, ..classical })?.state.rho;
            let mut rows = Vec::new();
            for &c in speeds {
                let run = run_heat(&HeatConfig { dt, ..with_c(SpeedOfLight::Finite(c)) })?;
                rows.push((c, max_diff(&run.state.rho, &reference)));
            }
            (dt, rows)
        }
        LimitSystem::Kfp(base) => {
            let classical = KfpConfig {
                params: base.params.with_c(SpeedOfLight::Infinite),
                variant: Variant::Classical,
                ..base.clone()
            };
            let relativistic = |c| KfpConfig {
                params: base.params.with_c(SpeedOfLight::Finite(c)),
                variant: Variant::Dh,
                ..base.clone()
            };
            let mut dt = base.dt.min(stability_bound(&classical.operator()?));
            for &c in speeds {
                dt = dt.min(stability_bound(&relativistic(c).operator()?));
            }
            let reference = run_kfp(&KfpConfig { dt, ..classical })?.state.rho;
            let mut rows = Vec::new();
            for &c in speeds {
                let run = run_kfp(&KfpConfig { dt, ..relativistic(c) })?;
                rows.push((c, max_diff(&run.state.rho, &reference)));
            }
            (dt, rows)
        }
    };
    let mut sorted = rows.clone();
    sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite speeds"));
    let monotone = sorted.windows(2).all(|w| w[1].1 < w[0].1);
    Ok(LimitReport { rows, dt, monotone })
}
