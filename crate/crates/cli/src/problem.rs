//! Turns a run configuration into a system, a pseudo-orbit and (for gallery orbits) the family
//! of pseudo-orbits used by finite-difference checks.

use std::fs::File;

use shadowkit::system::csv_io::{read_continuous, read_discrete};
use shadowkit::system::{
    gallery, ContinuousFamily, ContinuousSystem, DiscreteFamily, DiscreteSystem, GalleryProblem,
    PseudoOrbitDiscrete, PseudoSolutionContinuous,
};

use crate::config::RunConfig;
use crate::CliError;

pub enum Problem {
    Discrete {
        sys: DiscreteSystem,
        y: PseudoOrbitDiscrete,
        family: Option<DiscreteFamily>,
    },
    Continuous {
        sys: ContinuousSystem,
        y: PseudoSolutionContinuous,
        family: Option<ContinuousFamily>,
    },
}

pub fn load(cfg: &RunConfig) -> Result<Problem, CliError> {
    let g = gallery(&cfg.gallery, &cfg.params)?;
    let orbit = match &cfg.orbit {
        Some(p) => Some(
            File::open(p).map_err(|e| CliError::config(format!("orbit {}: {e}", p.display())))?,
        ),
        None => None,
    };
    Ok(match g {
        GalleryProblem::Discrete(mut p) => {
            p.system.assume_no_bounded_solutions |= cfg.assume_no_bounded_solutions;
            match orbit {
                None => Problem::Discrete {
                    sys: p.system,
                    y: p.orbit,
                    family: Some(p.family),
                },
                Some(file) => {
                    let (idx, values) = read_discrete(file)?;
                    let w = *p.system.window();
                    if idx.first() != Some(&w.lo) || idx.last() != Some(&w.hi) {
                        return Err(CliError::config(format!(
                            "orbit covers indices {}..{} but the window is {}..{}",
                            idx[0],
                            idx[idx.len() - 1],
                            w.lo,
                            w.hi
                        )));
                    }
                    if values.nrows() != p.system.dim() {
                        return Err(CliError::config(format!(
                            "orbit has {} components, the system has {}",
                            values.nrows(),
                            p.system.dim()
                        )));
                    }
                    let y = PseudoOrbitDiscrete::new(p.orbit.lambda.clone(), w, values)?;
                    Problem::Discrete {
                        sys: p.system,
                        y,
                        family: None,
                    }
                }
            }
        }
        GalleryProblem::Continuous(mut p) => {
            p.system.assume_no_bounded_solutions |= cfg.assume_no_bounded_solutions;
            match orbit {
                None => Problem::Continuous {
                    sys: p.system,
                    y: p.orbit,
                    family: Some(p.family),
                },
                Some(file) => {
                    let (t, values, derivs) = read_continuous(file)?;
                    let w = p.system.window;
                    let span = 1e-9 * w.step;
                    if t[0] > w.lo + span || t[t.len() - 1] < w.hi - span {
                        return Err(CliError::config(format!(
                            "orbit covers [{}, {}] but the window is [{}, {}]",
                            t[0],
                            t[t.len() - 1],
                            w.lo,
                            w.hi
                        )));
                    }
                    if values.nrows() != p.system.dim() {
                        return Err(CliError::config(format!(
                            "orbit has {} components, the system has {}",
                            values.nrows(),
                            p.system.dim()
                        )));
                    }
                    let y = PseudoSolutionContinuous::from_samples(
                        p.orbit.lambda.clone(),
                        t,
                        values,
                        derivs,
                    )?;
                    Problem::Continuous {
                        sys: p.system,
                        y,
                        family: None,
                    }
                }
            }
        }
    })
}
