use super::Manifold;
use crate::error::{Error, Result};
use crate::matcore::ComplexMatrix;
use std::fmt;
use std::str::FromStr;

/// Update rule. Second moments are one scalar per variable, accumulated from
/// the squared Riemannian norm of its gradient.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Method {
    Gd,
    Momentum { beta: f64 },
    Adam { beta1: f64, beta2: f64, eps: f64 },
    AmsGrad { beta1: f64, beta2: f64, eps: f64 },
}

impl Method {
    pub const MOMENTUM: Method = Method::Momentum { beta: 0.9 };
    pub const ADAM: Method = Method::Adam { beta1: 0.9, beta2: 0.999, eps: 1e-8 };
    pub const AMSGRAD: Method = Method::AmsGrad { beta1: 0.9, beta2: 0.999, eps: 1e-8 };

    pub fn name(&self) -> &'static str {
        match self {
            Method::Gd => "gd",
            Method::Momentum { .. } => "momentum",
            Method::Adam { .. } => "adam",
            Method::AmsGrad { .. } => "amsgrad",
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gd" => Ok(Method::Gd),
            "momentum" => Ok(Method::MOMENTUM),
            "adam" => Ok(Method::ADAM),
            "amsgrad" => Ok(Method::AMSGRAD),
            _ => Err(Error::InvalidArgument(format!("unknown optimizer `{s}`"))),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, Default)]
struct VarState {
    m: Option<ComplexMatrix>,
    v: f64,
    v_max: f64,
}

/// Result of one optimizer step.
#[derive(Clone, Copy, Debug)]
pub struct StepInfo {
    /// Riemannian norm of the gradient, summed over variables.
    pub grad_norm: f64,
}

/// Optimizer with its moment state.
#[derive(Clone, Debug)]
pub struct Optimizer {
    method: Method,
    state: Vec<VarState>,
    t: u64,
}

impl Optimizer {
    pub fn new(method: Method) -> Self {
        Self { method, state: Vec::new(), t: 0 }
    }

    pub fn method(&self) -> Method {
        self.method
    }

    /// Number of steps taken.
    pub fn steps(&self) -> u64 {
        self.t
    }

    /// Updates every point in place from its Euclidean gradient. The state is
    /// left untouched when an error is returned.
    pub fn step<M: Manifold>(
        &mut self,
        manifold: &M,
        points: &mut [M::Point],
        egrads: &[ComplexMatrix],
        lr: f64,
    ) -> Result<StepInfo> {
        if points.len() != egrads.len() {
            return Err(Error::InvalidArgument(format!(
                "{} points but {} gradients",
                points.len(),
                egrads.len()
            )));
        }
        if self.state.is_empty() {
            self.state = vec![VarState::default(); points.len()];
        } else if self.state.len() != points.len() {
            return Err(Error::InvalidArgument("variable count changed between steps".into()));
        }

        let mut rgrads = Vec::with_capacity(points.len());
        let mut norm_sq = 0.0;
        for (x, g) in points.iter().zip(egrads) {
            if !g.is_finite() {
                return Err(Error::NonFiniteGradient);
            }
            let rg = manifold.riemannian_gradient(x, g)?;
            let n2 = manifold.inner(x, &rg, &rg);
            if !rg.is_finite() || !n2.is_finite() {
                return Err(Error::NonFiniteGradient);
            }
            norm_sq += n2;
            rgrads.push((rg, n2));
        }

        let t = self.t + 1;
        let mut new_points = Vec::with_capacity(points.len());
        let mut new_state = Vec::with_capacity(points.len());
        for ((x, (rg, n2)), st) in points.iter().zip(rgrads).zip(&self.state) {
            let mut st = st.clone();
            let dir = match self.method {
                Method::Gd => &rg * -lr,
                Method::Momentum { beta } => {
                    let m = blend(st.m.take(), &rg, beta);
                    let d = &m * -lr;
                    st.m = Some(m);
                    d
                }
                Method::Adam { beta1, beta2, eps } => {
                    let m = blend(st.m.take(), &rg, beta1);
                    st.v = beta2 * st.v + (1.0 - beta2) * n2;
                    let m_hat = 1.0 / (1.0 - beta1.powi(t as i32));
                    let v_hat = st.v / (1.0 - beta2.powi(t as i32));
                    let d = &m * (-lr * m_hat / (v_hat.sqrt() + eps));
                    st.m = Some(m);
                    d
                }
                Method::AmsGrad { beta1, beta2, eps } => {
                    let m = blend(st.m.take(), &rg, beta1);
                    st.v = beta2 * st.v + (1.0 - beta2) * n2;
                    st.v_max = st.v_max.max(st.v);
                    let d = &m * (-lr / (st.v_max.sqrt() + eps));
                    st.m = Some(m);
                    d
                }
            };
            let next = manifold.retract(x, &dir)?;
            if !manifold.matrix(&next).is_finite() {
                return Err(Error::NonFinite);
            }
            if let Some(m) = st.m.take() {
                let moved = manifold.transport(x, &dir, &next, &m)?;
                st.m = Some(manifold.project(&next, &moved));
            }
            new_points.push(next);
            new_state.push(st);
        }

        for (p, n) in points.iter_mut().zip(new_points) {
            *p = n;
        }
        self.state = new_state;
        self.t = t;
        Ok(StepInfo { grad_norm: norm_sq.sqrt() })
    }
}

fn blend(m: Option<ComplexMatrix>, g: &ComplexMatrix, beta: f64) -> ComplexMatrix {
    match m {
        Some(m) => m * beta + g * (1.0 - beta),
        None => g * (1.0 - beta),
    }
}
