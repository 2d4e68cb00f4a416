//! Reverse-mode differentiation of real-valued functions of complex
//! matrices.
//!
//! A [`Graph`] is built once from variables, constants and primitive
//! operations and then evaluated for many bindings. Gradients follow the
//! convention `df(V) = 2 Re tr(G† V)`, i.e. `G = ∂f/∂X̄`, so that `G` is
//! directly the Euclidean gradient under the real inner product
//! `2 Re tr(A† B)`.
//!
//! For an operation `y = J dx + K dx̄` the adjoint sent back to `x` is
//! `J̄ ȳ + K ḡ_y`; each primitive below implements this rule.

mod check;

pub use check::{check_gradient_fd, FdReport};

use crate::error::{shape_err, Error, Result};
use crate::matcore::{inverse_permutation, permute_axes, ComplexMatrix};
use num_complex::Complex64;
use std::collections::HashMap;

/// Handle to a node of a [`Graph`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct NodeId(usize);

#[derive(Clone, Debug)]
enum Op {
    Var(usize),
    Const(ComplexMatrix),
    MatMul(NodeId, NodeId),
    Adjoint(NodeId),
    Transpose(NodeId),
    Conj(NodeId),
    Hadamard(NodeId, NodeId),
    Add(NodeId, NodeId),
    Sub(NodeId, NodeId),
    Scale(NodeId, Complex64),
    Trace(NodeId),
    Real(NodeId),
    Ln(NodeId),
    DivScalar(NodeId, NodeId),
    Kron(NodeId, NodeId),
    Permute { x: NodeId, dims: Vec<usize>, perm: Vec<usize> },
    Reshape(NodeId),
    Sum(NodeId),
    AbsSq(NodeId),
}

#[derive(Clone, Debug)]
struct Node {
    op: Op,
    rows: usize,
    cols: usize,
    /// Some variable is reachable through this node.
    active: bool,
}

#[derive(Clone, Debug)]
struct Variable {
    name: String,
    node: NodeId,
    rows: usize,
    cols: usize,
}

/// Named variable values for one evaluation.
pub type Bindings = HashMap<String, ComplexMatrix>;

/// Static computation graph with a single real scalar output.
#[derive(Clone, Debug, Default)]
pub struct Graph {
    nodes: Vec<Node>,
    vars: Vec<Variable>,
    output: Option<NodeId>,
}

/// Value and per-variable gradients, in variable declaration order.
#[derive(Clone, Debug)]
pub struct GradientResult {
    pub value: f64,
    pub gradients: Vec<(String, ComplexMatrix)>,
}

impl GradientResult {
    pub fn get(&self, name: &str) -> Option<&ComplexMatrix> {
        self.gradients.iter().find(|(n, _)| n == name).map(|(_, g)| g)
    }

    pub fn into_matrices(self) -> Vec<ComplexMatrix> {
        self.gradients.into_iter().map(|(_, g)| g).collect()
    }
}

/// Forward values of every node, kept for the reverse sweep.
pub struct Tape<'g> {
    graph: &'g Graph,
    values: Vec<Option<ComplexMatrix>>,
}

impl Graph {
    pub fn new() -> Self {
        Self::default()
    }

    fn push(&mut self, op: Op, rows: usize, cols: usize, active: bool) -> NodeId {
        self.nodes.push(Node { op, rows, cols, active });
        NodeId(self.nodes.len() - 1)
    }

    fn shape(&self, id: NodeId) -> (usize, usize) {
        let n = &self.nodes[id.0];
        (n.rows, n.cols)
    }

    fn active(&self, id: NodeId) -> bool {
        self.nodes[id.0].active
    }

    pub fn node_shape(&self, id: NodeId) -> (usize, usize) {
        self.shape(id)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Declares a free complex variable.
    pub fn var(&mut self, name: &str, rows: usize, cols: usize) -> Result<NodeId> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidDimension(format!("{name}: {rows}x{cols}")));
        }
        if self.vars.iter().any(|v| v.name == name) {
            return Err(Error::InvalidArgument(format!("variable `{name}` declared twice")));
        }
        let idx = self.vars.len();
        let node = self.push(Op::Var(idx), rows, cols, true);
        self.vars.push(Variable { name: name.to_string(), node, rows, cols });
        Ok(node)
    }

    pub fn constant(&mut self, value: ComplexMatrix) -> NodeId {
        let (r, c) = value.shape();
        self.push(Op::Const(value), r, c, false)
    }

    pub fn variable_names(&self) -> Vec<&str> {
        self.vars.iter().map(|v| v.name.as_str()).collect()
    }

    pub fn variable_shapes(&self) -> Vec<(usize, usize)> {
        self.vars.iter().map(|v| (v.rows, v.cols)).collect()
    }

    /// Marks the real scalar output.
    pub fn set_output(&mut self, id: NodeId) -> Result<()> {
        if self.shape(id) != (1, 1) {
            return Err(shape_err("set_output", format!("{:?} is not scalar", self.shape(id))));
        }
        self.output = Some(id);
        Ok(())
    }

    pub fn matmul(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let ((ar, ac), (br, bc)) = (self.shape(a), self.shape(b));
        if ac != br {
            return Err(shape_err("matmul", format!("{ar}x{ac} times {br}x{bc}")));
        }
        let act = self.active(a) || self.active(b);
        Ok(self.push(Op::MatMul(a, b), ar, bc, act))
    }

    pub fn adjoint(&mut self, x: NodeId) -> NodeId {
        let (r, c) = self.shape(x);
        let act = self.active(x);
        self.push(Op::Adjoint(x), c, r, act)
    }

    pub fn transpose(&mut self, x: NodeId) -> NodeId {
        let (r, c) = self.shape(x);
        let act = self.active(x);
        self.push(Op::Transpose(x), c, r, act)
    }

    pub fn conj(&mut self, x: NodeId) -> NodeId {
        let (r, c) = self.shape(x);
        let act = self.active(x);
        self.push(Op::Conj(x), r, c, act)
    }

    fn same_shape(&self, op: &'static str, a: NodeId, b: NodeId) -> Result<(usize, usize)> {
        let (sa, sb) = (self.shape(a), self.shape(b));
        if sa != sb {
            return Err(shape_err(op, format!("{sa:?} and {sb:?}")));
        }
        Ok(sa)
    }

    pub fn hadamard(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let (r, c) = self.same_shape("hadamard", a, b)?;
        let act = self.active(a) || self.active(b);
        Ok(self.push(Op::Hadamard(a, b), r, c, act))
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let (r, c) = self.same_shape("add", a, b)?;
        let act = self.active(a) || self.active(b);
        Ok(self.push(Op::Add(a, b), r, c, act))
    }

    pub fn sub(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let (r, c) = self.same_shape("sub", a, b)?;
        let act = self.active(a) || self.active(b);
        Ok(self.push(Op::Sub(a, b), r, c, act))
    }

    /// Multiplication by a fixed complex scalar.
    pub fn scale(&mut self, x: NodeId, s: Complex64) -> NodeId {
        let (r, c) = self.shape(x);
        let act = self.active(x);
        self.push(Op::Scale(x, s), r, c, act)
    }

    pub fn trace(&mut self, x: NodeId) -> Result<NodeId> {
        let (r, c) = self.shape(x);
        if r != c {
            return Err(shape_err("trace", format!("{r}x{c}")));
        }
        let act = self.active(x);
        Ok(self.push(Op::Trace(x), 1, 1, act))
    }

    /// Elementwise real part.
    pub fn real(&mut self, x: NodeId) -> NodeId {
        let (r, c) = self.shape(x);
        let act = self.active(x);
        self.push(Op::Real(x), r, c, act)
    }

    /// Elementwise natural log of the real part; every entry must have a
    /// positive real part at evaluation time.
    pub fn ln(&mut self, x: NodeId) -> NodeId {
        let (r, c) = self.shape(x);
        let act = self.active(x);
        self.push(Op::Ln(x), r, c, act)
    }

    /// Divides every entry of `x` by the scalar node `s`.
    pub fn div_scalar(&mut self, x: NodeId, s: NodeId) -> Result<NodeId> {
        if self.shape(s) != (1, 1) {
            return Err(shape_err("div_scalar", format!("divisor is {:?}", self.shape(s))));
        }
        let (r, c) = self.shape(x);
        let act = self.active(x) || self.active(s);
        Ok(self.push(Op::DivScalar(x, s), r, c, act))
    }

    pub fn kron(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let ((ar, ac), (br, bc)) = (self.shape(a), self.shape(b));
        let act = self.active(a) || self.active(b);
        self.push(Op::Kron(a, b), ar * br, ac * bc, act)
    }

    /// Views `x` as a row-major tensor with shape `dims`, reorders its axes
    /// (output axis `k` is input axis `perm[k]`) and reads the result back as
    /// a `rows x cols` matrix.
    pub fn permute(
        &mut self,
        x: NodeId,
        dims: &[usize],
        perm: &[usize],
        rows: usize,
        cols: usize,
    ) -> Result<NodeId> {
        let (r, c) = self.shape(x);
        let size: usize = dims.iter().product();
        if size != r * c || rows * cols != size {
            return Err(shape_err("permute", format!("{r}x{c} as {dims:?} into {rows}x{cols}")));
        }
        let mut seen = vec![false; dims.len()];
        if perm.len() != dims.len() || perm.iter().any(|&p| p >= dims.len() || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::InvalidArgument(format!("{perm:?} is not a permutation")));
        }
        let act = self.active(x);
        Ok(self.push(Op::Permute { x, dims: dims.to_vec(), perm: perm.to_vec() }, rows, cols, act))
    }

    pub fn reshape(&mut self, x: NodeId, rows: usize, cols: usize) -> Result<NodeId> {
        let (r, c) = self.shape(x);
        if r * c != rows * cols {
            return Err(shape_err("reshape", format!("{r}x{c} to {rows}x{cols}")));
        }
        let act = self.active(x);
        Ok(self.push(Op::Reshape(x), rows, cols, act))
    }

    /// Sum of all entries.
    pub fn sum(&mut self, x: NodeId) -> NodeId {
        let act = self.active(x);
        self.push(Op::Sum(x), 1, 1, act)
    }

    /// Elementwise squared modulus.
    pub fn abs_sq(&mut self, x: NodeId) -> NodeId {
        let (r, c) = self.shape(x);
        let act = self.active(x);
        self.push(Op::AbsSq(x), r, c, act)
    }

    fn output_node(&self) -> Result<NodeId> {
        self.output.ok_or_else(|| Error::InvalidArgument("graph has no output".into()))
    }

    fn ordered_values<'a>(&self, bindings: &'a Bindings) -> Result<Vec<&'a ComplexMatrix>> {
        self.vars
            .iter()
            .map(|v| bindings.get(&v.name).ok_or_else(|| Error::UnboundVariable(v.name.clone())))
            .collect()
    }

    fn check_values(&self, values: &[&ComplexMatrix]) -> Result<()> {
        if values.len() != self.vars.len() {
            return Err(Error::InvalidArgument(format!(
                "{} values for {} variables",
                values.len(),
                self.vars.len()
            )));
        }
        for (v, m) in self.vars.iter().zip(values) {
            if m.shape() != (v.rows, v.cols) {
                return Err(shape_err(
                    "bind",
                    format!("`{}` expects {}x{}, got {:?}", v.name, v.rows, v.cols, m.shape()),
                ));
            }
        }
        Ok(())
    }

    /// Forward pass with values given in variable declaration order.
    pub fn forward(&self, values: &[&ComplexMatrix]) -> Result<Tape<'_>> {
        let out = self.output_node()?;
        self.check_values(values)?;
        self.forward_to(values, out)
    }

    fn forward_to(&self, values: &[&ComplexMatrix], last: NodeId) -> Result<Tape<'_>> {
        let mut tape = Tape { graph: self, values: vec![None; self.nodes.len()] };
        for i in 0..=last.0 {
            let v = tape.eval_node(i, values)?;
            tape.values[i] = Some(v);
        }
        Ok(tape)
    }

    /// Value of an arbitrary node, with variable values in declaration order.
    pub fn node_value(&self, id: NodeId, values: &[&ComplexMatrix]) -> Result<ComplexMatrix> {
        self.check_values(values)?;
        let mut tape = self.forward_to(values, id)?;
        Ok(tape.values[id.0].take().expect("node evaluated"))
    }

    /// Value of the output.
    pub fn evaluate(&self, bindings: &Bindings) -> Result<f64> {
        self.forward(&self.ordered_values(bindings)?)?.value()
    }

    /// Value and gradients for named bindings.
    pub fn gradient(&self, bindings: &Bindings) -> Result<GradientResult> {
        self.gradient_ordered(&self.ordered_values(bindings)?)
    }

    /// Value and gradients with values in declaration order.
    pub fn gradient_ordered(&self, values: &[&ComplexMatrix]) -> Result<GradientResult> {
        let tape = self.forward(values)?;
        let value = tape.value()?;
        let grads = tape.backward()?;
        Ok(GradientResult {
            value,
            gradients: self.vars.iter().map(|v| v.name.clone()).zip(grads).collect(),
        })
    }
}

impl Tape<'_> {
    fn val(&self, id: NodeId) -> &ComplexMatrix {
        self.values[id.0].as_ref().expect("node evaluated before use")
    }

    /// Real output value.
    pub fn value(&self) -> Result<f64> {
        let z = self.val(self.graph.output_node()?)[(0, 0)];
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        if z.im.abs() > 1e-12 * (1.0 + z.re.abs()) {
            return Err(Error::ComplexOutput { imag: z.im });
        }
        Ok(z.re)
    }

    fn eval_node(&self, i: usize, values: &[&ComplexMatrix]) -> Result<ComplexMatrix> {
        let node = &self.graph.nodes[i];
        Ok(match &node.op {
            Op::Var(k) => values[*k].clone(),
            Op::Const(m) => m.clone(),
            Op::MatMul(a, b) => self.val(*a) * self.val(*b),
            Op::Adjoint(x) => self.val(*x).adjoint(),
            Op::Transpose(x) => self.val(*x).transpose(),
            Op::Conj(x) => self.val(*x).conj(),
            Op::Hadamard(a, b) => self.val(*a).hadamard(self.val(*b)),
            Op::Add(a, b) => self.val(*a) + self.val(*b),
            Op::Sub(a, b) => self.val(*a) - self.val(*b),
            Op::Scale(x, s) => self.val(*x) * *s,
            Op::Trace(x) => ComplexMatrix::from_vec(1, 1, vec![self.val(*x).trace()]),
            Op::Real(x) => self.val(*x).real_part(),
            Op::Ln(x) => {
                let v = self.val(*x);
                if let Some(bad) = v.as_slice().iter().find(|z| !(z.re > 0.0)) {
                    return Err(Error::DomainError(format!("log of {bad}")));
                }
                v.map(|z| Complex64::new(z.re.ln(), 0.0))
            }
            Op::DivScalar(x, s) => {
                let d = self.val(*s)[(0, 0)];
                if d.norm() == 0.0 {
                    return Err(Error::DomainError("division by zero".into()));
                }
                self.val(*x) * d.inv()
            }
            Op::Kron(a, b) => self.val(*a).kron(self.val(*b)),
            Op::Permute { x, dims, perm } => ComplexMatrix::from_vec(
                node.rows,
                node.cols,
                permute_axes(self.val(*x).as_slice(), dims, perm),
            ),
            Op::Reshape(x) => ComplexMatrix::from_vec(node.rows, node.cols, self.val(*x).as_slice().to_vec()),
            Op::Sum(x) => ComplexMatrix::from_vec(1, 1, vec![self.val(*x).sum()]),
            Op::AbsSq(x) => self.val(*x).map(|z| Complex64::new(z.norm_sqr(), 0.0)),
        })
    }

    /// Reverse sweep; returns gradients in variable declaration order.
    pub fn backward(&self) -> Result<Vec<ComplexMatrix>> {
        let g = self.graph;
        let out = g.output_node()?;
        let mut adj: Vec<Option<ComplexMatrix>> = vec![None; out.0 + 1];
        // f = Re(y) for the scalar output y, hence df = 2 Re(conj(1/2) dy).
        adj[out.0] = Some(ComplexMatrix::from_vec(1, 1, vec![Complex64::new(0.5, 0.0)]));

        for i in (0..=out.0).rev() {
            let Some(gy) = adj[i].take() else { continue };
            let node = &g.nodes[i];
            if !node.active {
                continue;
            }
            if let Op::Var(_) = node.op {
                // leaves keep their adjoint for collection below
                adj[i] = Some(gy);
                continue;
            }
            let mut send = |id: NodeId, contrib: ComplexMatrix| {
                if !g.active(id) {
                    return;
                }
                match &mut adj[id.0] {
                    Some(acc) => *acc += contrib,
                    slot @ None => *slot = Some(contrib),
                }
            };
            match &node.op {
                Op::Var(_) | Op::Const(_) => {}
                Op::MatMul(a, b) => {
                    if g.active(*a) {
                        send(*a, &gy * &self.val(*b).adjoint());
                    }
                    if g.active(*b) {
                        send(*b, &self.val(*a).adjoint() * &gy);
                    }
                }
                Op::Adjoint(x) => send(*x, gy.adjoint()),
                Op::Transpose(x) => send(*x, gy.transpose()),
                Op::Conj(x) => send(*x, gy.conj()),
                Op::Hadamard(a, b) => {
                    if g.active(*a) {
                        send(*a, gy.zip_map(self.val(*b), |y, v| y * v.conj()));
                    }
                    if g.active(*b) {
                        send(*b, gy.zip_map(self.val(*a), |y, v| y * v.conj()));
                    }
                }
                Op::Add(a, b) => {
                    if g.active(*b) {
                        send(*b, gy.clone());
                    }
                    send(*a, gy);
                }
                Op::Sub(a, b) => {
                    if g.active(*b) {
                        send(*b, -&gy);
                    }
                    send(*a, gy);
                }
                Op::Scale(x, s) => send(*x, gy * s.conj()),
                Op::Trace(x) => {
                    let n = g.shape(*x).0;
                    send(*x, ComplexMatrix::identity(n) * gy[(0, 0)]);
                }
                Op::Real(x) => send(*x, gy.real_part()),
                Op::Ln(x) => send(*x, gy.zip_map(self.val(*x), |y, v| Complex64::new(y.re / v.re, 0.0))),
                Op::DivScalar(x, s) => {
                    let d = self.val(*s)[(0, 0)];
                    if g.active(*s) {
                        let num = self.val(*x);
                        let acc: Complex64 =
                            num.as_slice().iter().zip(gy.as_slice()).map(|(a, y)| a.conj() * y).sum();
                        let gs = -acc / (d.conj() * d.conj());
                        send(*s, ComplexMatrix::from_vec(1, 1, vec![gs]));
                    }
                    send(*x, gy * d.conj().inv());
                }
                Op::Kron(a, b) => {
                    let (va, vb) = (self.val(*a), self.val(*b));
                    let ((ar, ac), (br, bc)) = (va.shape(), vb.shape());
                    let cols = ac * bc;
                    let at = |i: usize, j: usize, k: usize, l: usize| gy.as_slice()[(i * br + k) * cols + j * bc + l];
                    if g.active(*a) {
                        let ga = ComplexMatrix::from_fn(ar, ac, |i, j| {
                            let mut s = Complex64::new(0.0, 0.0);
                            for k in 0..br {
                                for l in 0..bc {
                                    s += vb[(k, l)].conj() * at(i, j, k, l);
                                }
                            }
                            s
                        });
                        send(*a, ga);
                    }
                    if g.active(*b) {
                        let gb = ComplexMatrix::from_fn(br, bc, |k, l| {
                            let mut s = Complex64::new(0.0, 0.0);
                            for i in 0..ar {
                                for j in 0..ac {
                                    s += va[(i, j)].conj() * at(i, j, k, l);
                                }
                            }
                            s
                        });
                        send(*b, gb);
                    }
                }
                Op::Permute { x, dims, perm } => {
                    let out_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
                    let back = permute_axes(gy.as_slice(), &out_dims, &inverse_permutation(perm));
                    let (r, c) = g.shape(*x);
                    send(*x, ComplexMatrix::from_vec(r, c, back));
                }
                Op::Reshape(x) => {
                    let (r, c) = g.shape(*x);
                    send(*x, ComplexMatrix::from_vec(r, c, gy.into_vec()));
                }
                Op::Sum(x) => {
                    let (r, c) = g.shape(*x);
                    send(*x, ComplexMatrix::from_vec(r, c, vec![gy[(0, 0)]; r * c]));
                }
                Op::AbsSq(x) => send(*x, gy.zip_map(self.val(*x), |y, v| v * (2.0 * y.re))),
            }
        }

        let mut grads = Vec::with_capacity(g.vars.len());
        for v in &g.vars {
            let grad = match adj.get(v.node.0).and_then(|a| a.clone()) {
                Some(m) => m,
                None => ComplexMatrix::zeros(v.rows, v.cols),
            };
            if !grad.is_finite() {
                return Err(Error::NonFiniteGradient);
            }
            grads.push(grad);
        }
        Ok(grads)
    }
}
