//! CSV writers for density snapshots and trajectories. Floats use Rust's
//! shortest round-trip formatting, so no precision is lost.

use std::io::{self, Write};

use crate::current::{probability_current, GradientScheme};
use crate::grid::GridWavefunction;
use crate::trajectories::TrajectoryEnsemble;

/// Density snapshot: `x,prob_density,current` in 1D and
/// `x,y,prob_density,current_x,current_y` in 2D.
pub fn write_density_csv(w: &mut impl Write, psi: &GridWavefunction, scheme: GradientScheme) -> io::Result<()> {
    let rho = psi.density();
    let j = probability_current(psi, scheme);
    if psi.ndim() == 1 {
        writeln!(w, "x,prob_density,current")?;
    } else {
        writeln!(w, "x,y,prob_density,current_x,current_y")?;
    }
    for idx in 0..psi.len() {
        let p = psi.point(idx);
        if psi.ndim() == 1 {
            writeln!(w, "{},{},{}", p[0], rho[idx], j[0][idx])?;
        } else {
            writeln!(w, "{},{},{},{},{}", p[0], p[1], rho[idx], j[0][idx], j[1][idx])?;
        }
    }
    Ok(())
}

/// Rows of `t,particle_id,x[,y]` collected during a run.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrajectoryLog {
    ndim: usize,
    rows: Vec<(f64, usize, Vec<f64>)>,
}

impl TrajectoryLog {
    pub fn new(ndim: usize) -> Self {
        Self { ndim, rows: Vec::new() }
    }

    /// Appends the first `count` particles of `ens`.
    pub fn record(&mut self, ens: &TrajectoryEnsemble, count: usize) {
        for i in 0..count.min(ens.len()) {
            self.rows.push((ens.time(), i, ens.particle(i).to_vec()));
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn rows(&self) -> &[(f64, usize, Vec<f64>)] {
        &self.rows
    }

    pub fn write_csv(&self, w: &mut impl Write) -> io::Result<()> {
        if self.ndim == 1 {
            writeln!(w, "t,particle_id,x")?;
        } else {
            writeln!(w, "t,particle_id,x,y")?;
        }
        for (t, id, p) in &self.rows {
            write!(w, "{t},{id}")?;
            for x in p {
                write!(w, ",{x}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}
