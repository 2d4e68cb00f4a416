//! Translation-invariant ternary MERA for periodic chains of `2·3^n` sites.
//!
//! Layer `k` maps sites of dimension `χ_k` to sites of dimension
//! `χ_{k+1} = min(χ_k³, χ_max)`. It holds one disentangler `u`
//! (`χ_k² x χ_k²`, unitary) acting on the site pairs `(3j+2, 3j+3)` and one
//! isometry stored as `z` (`χ_k³ x χ_{k+1}`, orthonormal columns) that
//! coarse-grains each block `(3j, 3j+1, 3j+2)` through `z†`. The top two
//! sites carry a trial state `φ`.

use crate::autodiff::{Graph, NodeId};
use crate::error::{Error, Result};
use crate::matcore::{hermitian_eig, ComplexMatrix};
use crate::optim::Problem;
use crate::quantum::tfi_local_terms;
use crate::stiefel::{self, Stiefel, StiefelPoint};
use num_complex::Complex64;
use rand::Rng;

/// Bond dimensions of a network.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MeraLayout {
    pub n_sites: usize,
    /// `chi[0] = 2` up to the top dimension `chi[layers]`.
    pub chi: Vec<usize>,
}

impl MeraLayout {
    pub fn new(n_sites: usize, chi_max: usize) -> Result<Self> {
        let mut m = n_sites;
        let mut layers = 0;
        if m % 2 != 0 {
            return Err(Error::InvalidDimension(format!("{n_sites} sites is not 2·3^n")));
        }
        m /= 2;
        while m > 1 && m % 3 == 0 {
            m /= 3;
            layers += 1;
        }
        if m != 1 || layers == 0 {
            return Err(Error::InvalidDimension(format!("{n_sites} sites is not 2·3^n with n ≥ 1")));
        }
        if chi_max < 2 {
            return Err(Error::InvalidArgument("chi_max must be at least 2".into()));
        }
        let mut chi = vec![2];
        for _ in 0..layers {
            let c = *chi.last().unwrap();
            chi.push((c * c * c).min(chi_max));
        }
        Ok(Self { n_sites, chi })
    }

    pub fn layers(&self) -> usize {
        self.chi.len() - 1
    }

    pub fn top_dim(&self) -> usize {
        *self.chi.last().unwrap()
    }
}

/// Network tensors, ordered as `u0, z0, u1, z1, ..., [φ]`.
#[derive(Clone, Debug)]
pub struct MeraParams {
    pub layout: MeraLayout,
    pub u: Vec<StiefelPoint>,
    pub z: Vec<StiefelPoint>,
    pub phi: Option<StiefelPoint>,
}

impl MeraParams {
    /// Identity disentanglers, near-identity isometries and a random `φ`.
    pub fn initial<R: Rng + ?Sized>(layout: &MeraLayout, with_state: bool, rng: &mut R) -> Result<Self> {
        let mut u = Vec::new();
        let mut z = Vec::new();
        for k in 0..layout.layers() {
            let (a, b) = (layout.chi[k], layout.chi[k + 1]);
            u.push(StiefelPoint::new(ComplexMatrix::identity(a * a))?);
            let noisy = ComplexMatrix::eye(a * a * a, b) + ComplexMatrix::ginibre(a * a * a, b, rng) * 1e-2;
            z.push(StiefelPoint::nearest(&noisy)?);
        }
        let phi = if with_state {
            let t = layout.top_dim();
            Some(stiefel::random_point(t * t, 1, rng)?)
        } else {
            None
        };
        Ok(Self { layout: layout.clone(), u, z, phi })
    }

    pub fn into_points(self) -> Vec<StiefelPoint> {
        let mut out = Vec::new();
        for (u, z) in self.u.into_iter().zip(self.z) {
            out.push(u);
            out.push(z);
        }
        out.extend(self.phi);
        out
    }

    pub fn from_points(layout: &MeraLayout, points: &[StiefelPoint]) -> Result<Self> {
        let l = layout.layers();
        if points.len() != 2 * l && points.len() != 2 * l + 1 {
            return Err(Error::InvalidArgument(format!("{} tensors for {l} layers", points.len())));
        }
        Ok(Self {
            layout: layout.clone(),
            u: points.iter().step_by(2).take(l).cloned().collect(),
            z: points.iter().skip(1).step_by(2).take(l).cloned().collect(),
            phi: points.get(2 * l).cloned(),
        })
    }

    fn matrices(&self) -> Vec<&ComplexMatrix> {
        let mut out = Vec::new();
        for (u, z) in self.u.iter().zip(&self.z) {
            out.push(u.matrix());
            out.push(z.matrix());
        }
        if let Some(p) = &self.phi {
            out.push(p.matrix());
        }
        out
    }
}

/// Two-site operator on the coarse chain produced by one layer from the
/// two-site operator `h` of the fine chain, counting the three fine bonds
/// that feed each coarse bond.
pub fn ascend_node(g: &mut Graph, h: NodeId, u: NodeId, z: NodeId, a: usize, b: usize) -> Result<NodeId> {
    let ua = g.adjoint(u);
    let eye = g.constant(ComplexMatrix::identity(a));

    let uh = g.matmul(u, h)?;
    let center = g.matmul(uh, ua)?;

    let iu = g.kron(eye, u);
    let hi = g.kron(h, eye);
    let iua = g.kron(eye, ua);
    let t = g.matmul(iu, hi)?;
    let left = g.matmul(t, iua)?;

    let ui = g.kron(u, eye);
    let ih = g.kron(eye, h);
    let uai = g.kron(ua, eye);
    let t = g.matmul(ui, ih)?;
    let right = g.matmul(t, uai)?;

    // reduced environments of one block, from the isometry alone
    let z01 = g.reshape(z, a * a, a * b)?;
    let z01a = g.adjoint(z01);
    let pl2 = g.matmul(z01a, z01)?;
    let z12 = g.permute(z, &[a, a, a, b], &[1, 2, 0, 3], a * a, a * b)?;
    let z12a = g.adjoint(z12);
    let pr2 = g.matmul(z12a, z12)?;
    let z0 = g.reshape(z, a, a * a * b)?;
    let z0a = g.adjoint(z0);
    let pl3 = g.matmul(z0a, z0)?;
    let z2 = g.permute(z, &[a, a, a, b], &[2, 0, 1, 3], a, a * a * b)?;
    let z2a = g.adjoint(z2);
    let pr3 = g.matmul(z2a, z2)?;

    let (a2, a4, b2) = (a * a, a * a * a * a, b * b);
    let pl2 = g.permute(pl2, &[a, b, a, b], &[1, 3, 0, 2], b2, a2)?;
    let pr2 = g.permute(pr2, &[a, b, a, b], &[0, 2, 1, 3], a2, b2)?;
    let pl3 = g.permute(pl3, &[a, a, b, a, a, b], &[2, 5, 0, 1, 3, 4], b2, a4)?;
    let pr3 = g.permute(pr3, &[a, a, b, a, a, b], &[0, 1, 3, 4, 2, 5], a4, b2)?;

    let oc = g.permute(center, &[a, a, a, a], &[0, 2, 1, 3], a2, a2)?;
    let t = g.matmul(oc, pr2)?;
    let yc = g.matmul(pl2, t)?;

    let ol = g.permute(left, &[a; 6], &[0, 1, 3, 4, 2, 5], a4, a2)?;
    let t = g.matmul(ol, pr2)?;
    let yl = g.matmul(pl3, t)?;

    let or = g.permute(right, &[a; 6], &[0, 3, 1, 2, 4, 5], a2, a4)?;
    let t = g.matmul(or, pr3)?;
    let yr = g.matmul(pl2, t)?;

    let y = g.add(yc, yl)?;
    let y = g.add(y, yr)?;
    g.permute(y, &[b, b, b, b], &[0, 2, 1, 3], b2, b2)
}

/// Numeric [`ascend_node`].
pub fn ascend(h: &ComplexMatrix, u: &ComplexMatrix, z: &ComplexMatrix) -> Result<ComplexMatrix> {
    let a = u.rows();
    let a = (a as f64).sqrt().round() as usize;
    if h.shape() != (a * a, a * a) || u.shape() != (a * a, a * a) || z.rows() != a * a * a {
        return Err(Error::ShapeMismatch {
            op: "ascend",
            detail: format!("h {:?}, u {:?}, z {:?}", h.shape(), u.shape(), z.shape()),
        });
    }
    let mut g = Graph::new();
    let (hn, un, zn) = (g.constant(h.clone()), g.constant(u.clone()), g.constant(z.clone()));
    let out = ascend_node(&mut g, hn, un, zn, a, z.cols())?;
    g.node_value(out, &[])
}

/// What the graph minimizes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeraObjective {
    /// `⟨φ|H_top|φ⟩ / N`.
    Energy,
    /// `Re tr(H_top) / N`; its minimizers span the low-energy subspace.
    Trace,
}

/// Differentiable MERA objective for the transverse-field Ising chain.
pub struct MeraGraph {
    pub layout: MeraLayout,
    pub objective: MeraObjective,
    graph: Graph,
    top: NodeId,
    manifold: Stiefel,
}

impl MeraGraph {
    pub fn new(layout: &MeraLayout, hx: f64, objective: MeraObjective, manifold: Stiefel) -> Result<Self> {
        let mut g = Graph::new();
        let mut h = g.constant(tfi_local_terms(hx));
        for k in 0..layout.layers() {
            let (a, b) = (layout.chi[k], layout.chi[k + 1]);
            let u = g.var(&format!("u{k}"), a * a, a * a)?;
            let z = g.var(&format!("z{k}"), a * a * a, b)?;
            h = ascend_node(&mut g, h, u, z, a, b)?;
        }
        let t = layout.top_dim();
        let swapped = g.permute(h, &[t, t, t, t], &[1, 0, 3, 2], t * t, t * t)?;
        let top = g.add(h, swapped)?;
        let scale = Complex64::new(1.0 / layout.n_sites as f64, 0.0);
        let out = match objective {
            MeraObjective::Energy => {
                let phi = g.var("phi", t * t, 1)?;
                let pa = g.adjoint(phi);
                let hp = g.matmul(top, phi)?;
                let e = g.matmul(pa, hp)?;
                g.real(e)
            }
            MeraObjective::Trace => {
                let tr = g.trace(top)?;
                g.real(tr)
            }
        };
        let out = g.scale(out, scale);
        g.set_output(out)?;
        Ok(Self { layout: layout.clone(), objective, graph: g, top, manifold })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    /// Top-level Hamiltonian `H^{(n)}` on the two top sites.
    pub fn top_hamiltonian(&self, params: &MeraParams) -> Result<ComplexMatrix> {
        let mut vals = params.matrices();
        if self.objective == MeraObjective::Trace {
            vals.truncate(2 * self.layout.layers());
        }
        Ok(self.graph.node_value(self.top, &vals)?.hermitian_part())
    }

    /// Objective value for the given tensors.
    pub fn value(&self, params: &MeraParams) -> Result<f64> {
        self.graph.forward(&self.values(params))?.value()
    }

    fn values<'a>(&self, params: &'a MeraParams) -> Vec<&'a ComplexMatrix> {
        let mut vals = params.matrices();
        if self.objective == MeraObjective::Trace {
            vals.truncate(2 * self.layout.layers());
        }
        vals
    }
}

impl Problem for MeraGraph {
    type M = Stiefel;

    fn manifold(&self) -> &Stiefel {
        &self.manifold
    }

    fn value_and_gradient(&self, points: &[StiefelPoint]) -> Result<(f64, Vec<ComplexMatrix>)> {
        let vals: Vec<&ComplexMatrix> = points.iter().map(|p| p.matrix()).collect();
        let r = self.graph.gradient_ordered(&vals)?;
        Ok((r.value, r.into_matrices()))
    }
}

/// `⟨φ|H_top|φ⟩ / N` for the Ising chain with field `hx`.
pub fn variational_energy(params: &MeraParams, hx: f64) -> Result<f64> {
    let g = MeraGraph::new(&params.layout, hx, MeraObjective::Energy, Stiefel::default())?;
    if params.phi.is_none() {
        return Err(Error::InvalidArgument("energy needs a top state".into()));
    }
    g.value(params)
}

/// `Re tr(H_top) / N`.
pub fn trace_cost(params: &MeraParams, hx: f64) -> Result<f64> {
    MeraGraph::new(&params.layout, hx, MeraObjective::Trace, Stiefel::default())?.value(params)
}

/// Lowest `k` eigenvalues of `H_top` (total energies, not per site).
pub fn low_energy_spectrum(params: &MeraParams, hx: f64, k: usize) -> Result<Vec<f64>> {
    let g = MeraGraph::new(&params.layout, hx, MeraObjective::Trace, Stiefel::default())?;
    let e = hermitian_eig(&g.top_hamiltonian(params)?)?;
    Ok(e.eigenvalues.into_iter().take(k).collect())
}

/// Exact ground-state energy per site of the critical periodic chain
/// (`hx = 1`): `−2 / (N sin(π/2N))`.
pub fn tfi_exact_gs_energy_per_site(n_sites: usize) -> f64 {
    let n = n_sites as f64;
    -2.0 / (n * (std::f64::consts::PI / (2.0 * n)).sin())
}

/// Exact ground-state energy per site of the periodic chain
/// `Σ σᶻσᶻ + h Σ σˣ` for even `N` and any `h`, from its free-fermion
/// spectrum in the antiperiodic sector.
pub fn tfi_ground_energy_per_site(n_sites: usize, hx: f64) -> f64 {
    let n = n_sites as f64;
    let total: f64 = (0..n_sites)
        .map(|m| {
            let k = (2 * m + 1) as f64 * std::f64::consts::PI / n;
            (1.0 + hx * hx + 2.0 * hx * k.cos()).sqrt()
        })
        .sum();
    -total / n
}
