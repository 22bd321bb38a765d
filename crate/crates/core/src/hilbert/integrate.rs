use super::propagation::times_match;
use super::{DensityState, HamiltonianFamily, PhysicsConfig, TimeGrid};
use crate::error::{BqmError, Result};
use crate::linalg::{commutator, ComplexMatrix, C64};

/// Classical RK4 for `i hbar d(rho)/dt = [G(t), rho]`.
///
/// Returns the state at every grid point, `grid.steps + 1` matrices in all.
/// Trace is conserved exactly by the scheme (each stage increment is a
/// commutator); Hermiticity is conserved up to roundoff.
pub fn integrate_liouville(
    rho0: &ComplexMatrix,
    generator: impl Fn(f64) -> Result<ComplexMatrix>,
    grid: &TimeGrid,
    hbar: f64,
) -> Result<Vec<ComplexMatrix>> {
    if grid.t0 == grid.t1 {
        return Ok(vec![rho0.clone(); grid.steps + 1]);
    }
    let dt = grid.dt();
    if grid.t0 + dt == grid.t0 || !dt.is_normal() {
        return Err(BqmError::numeric(format!("integration step {dt:e} underflows at t = {}", grid.t0)));
    }
    let mut out = Vec::with_capacity(grid.steps + 1);
    out.push(rho0.clone());
    let factor = C64::new(0.0, -1.0 / hbar);
    let rhs = |t: f64, rho: &ComplexMatrix| -> Result<ComplexMatrix> {
        let g = generator(t)?;
        Ok(commutator(&g, rho)?.scale(factor))
    };
    let mut rho = rho0.clone();
    for k in 0..grid.steps {
        let t = grid.time(k);
        let h = grid.time(k + 1) - t;
        let k1 = rhs(t, &rho)?;
        let k2 = rhs(t + 0.5 * h, &(&rho + &k1.scale_real(0.5 * h)))?;
        let k3 = rhs(t + 0.5 * h, &(&rho + &k2.scale_real(0.5 * h)))?;
        let k4 = rhs(t + h, &(&rho + &k3.scale_real(h)))?;
        let mut incr = k1;
        incr += &k2.scale_real(2.0);
        incr += &k3.scale_real(2.0);
        incr += &k4;
        rho += &incr.scale_real(h / 6.0);
        if !rho.is_finite() {
            return Err(BqmError::numeric(format!("integration diverged at t = {}", t + h)));
        }
        out.push(rho.clone());
    }
    Ok(out)
}

/// Integrates the von Neumann equation `i hbar d(rho)/dt = [H(t), rho]`.
pub fn integrate_von_neumann(
    rho0: &DensityState,
    h: &HamiltonianFamily,
    grid: &TimeGrid,
    cfg: &PhysicsConfig,
) -> Result<Vec<DensityState>> {
    h.require_in_domain(grid.t0, "grid start")?;
    h.require_in_domain(grid.t1, "grid end")?;
    if !times_match(rho0.time, grid.t0) {
        return Err(BqmError::contract(format!(
            "initial density is at t = {} but the grid starts at {}",
            rho0.time, grid.t0
        )));
    }
    rho0.rho.ensure_same_dim(&h.at(grid.t0))?;
    let traj = integrate_liouville(&rho0.rho, |t| Ok(h.at(t)), grid, cfg.hbar)?;
    Ok(traj
        .into_iter()
        .enumerate()
        .map(|(k, rho)| DensityState {
            rho,
            time: grid.time(k),
        })
        .collect())
}
