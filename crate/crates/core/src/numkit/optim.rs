use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

pub const ADAGRAD_EPSILON: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OptimizerKind {
    Sgd,
    Adagrad,
}

impl fmt::Display for OptimizerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OptimizerKind::Sgd => "sgd",
            OptimizerKind::Adagrad => "adagrad",
        })
    }
}

impl FromStr for OptimizerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sgd" => Ok(OptimizerKind::Sgd),
            "adagrad" => Ok(OptimizerKind::Adagrad),
            other => Err(Error::Config(format!("unknown optimizer {other:?}"))),
        }
    }
}

/// Optimizer hyper-parameters, without state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OptimizerSpec {
    pub kind: OptimizerKind,
    pub learning_rate: f64,
}

impl Default for OptimizerSpec {
    fn default() -> Self {
        OptimizerSpec {
            kind: OptimizerKind::Adagrad,
            learning_rate: 0.05,
        }
    }
}

/// Stateful optimizer over one flat parameter vector.
#[derive(Clone, Debug)]
pub struct Optimizer {
    pub spec: OptimizerSpec,
    accumulator: Vec<f64>,
}

impl Optimizer {
    pub fn new(spec: OptimizerSpec) -> Self {
        Optimizer {
            spec,
            accumulator: Vec::new(),
        }
    }

    pub fn sgd(learning_rate: f64) -> Self {
        Self::new(OptimizerSpec {
            kind: OptimizerKind::Sgd,
            learning_rate,
        })
    }

    pub fn adagrad(learning_rate: f64) -> Self {
        Self::new(OptimizerSpec {
            kind: OptimizerKind::Adagrad,
            learning_rate,
        })
    }

    /// Sum of squared gradients per coordinate (empty before the first
    /// adagrad step).
    pub fn accumulator(&self) -> &[f64] {
        &self.accumulator
    }

    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) -> Result<()> {
        if params.len() != grads.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} parameters, {} gradients",
                params.len(),
                grads.len()
            )));
        }
        let lr = self.spec.learning_rate;
        match self.spec.kind {
            OptimizerKind::Sgd => {
                for (p, g) in params.iter_mut().zip(grads) {
                    *p -= lr * g;
                }
            }
            OptimizerKind::Adagrad => {
                if self.accumulator.is_empty() {
                    self.accumulator = vec![0.0; params.len()];
                } else if self.accumulator.len() != params.len() {
                    return Err(Error::ShapeMismatch(format!(
                        "optimizer state for {} parameters, got {}",
                        self.accumulator.len(),
                        params.len()
                    )));
                }
                for ((p, g), acc) in params.iter_mut().zip(grads).zip(&mut self.accumulator) {
                    if *g == 0.0 {
                        continue;
                    }
                    *acc += g * g;
                    *p -= lr * g / (acc.sqrt() + ADAGRAD_EPSILON);
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn sgd_step() {
        let mut opt = Optimizer::sgd(0.1);
        let mut p = [1.0];
        opt.step(&mut p, &[1.0]).unwrap();
        assert!((p[0] - 0.9).abs() < 1e-15);
    }

    #[test]
    fn adagrad_first_step() {
        let mut opt = Optimizer::adagrad(1.0);
        let mut p = [0.0];
        opt.step(&mut p, &[2.0]).unwrap();
        assert_eq!(opt.accumulator(), &[4.0]);
        assert!((p[0] - (-2.0 / (2.0 + 1e-8))).abs() < 1e-15);
    }

    #[test]
    fn zero_gradient_changes_nothing() {
        for mut opt in [Optimizer::sgd(0.5), Optimizer::adagrad(0.5)] {
            let mut p = [1.0, -2.0];
            opt.step(&mut p, &[0.0, 0.0]).unwrap();
            assert_eq!(p, [1.0, -2.0]);
            assert!(opt.accumulator().iter().all(|&a| a == 0.0));
        }
    }

    #[test]
    fn shape_mismatch() {
        let mut opt = Optimizer::sgd(0.1);
        assert!(matches!(
            opt.step(&mut [1.0], &[1.0, 2.0]),
            Err(Error::ShapeMismatch(_))
        ));
    }

    proptest! {
        #[test]
        fn adagrad_step_size_shrinks_for_constant_sign(gs in proptest::collection::vec(0.01f64..10.0, 2..20)) {
            let mut opt = Optimizer::adagrad(0.3);
            let mut p = [0.0];
            let mut last_step = f64::INFINITY;
            let mut last_acc = 0.0;
            for g in gs {
                let before = p[0];
                opt.step(&mut p, &[g]).unwrap();
                let effective = (before - p[0]) / g;
                prop_assert!(effective <= last_step * (1.0 + 1e-12));
                prop_assert!(opt.accumulator()[0] >= last_acc);
                last_step = effective;
                last_acc = opt.accumulator()[0];
            }
        }
    }
}
