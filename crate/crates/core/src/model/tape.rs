//! Define-by-run reverse-mode automatic differentiation over dense row-major
//! `f64` matrices.
//!
//! A [`Tape`] records every operation of one forward pass; [`Tape::backward`]
//! walks it in reverse and returns gradients for the parameters that were
//! read through [`Tape::param`]. Gradient accumulation order is fixed by the
//! recording order, so results are bit-reproducible.

use std::collections::HashMap;

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Tensor {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn filled(rows: usize, cols: usize, value: f64) -> Self {
        Self { rows, cols, data: vec![value; rows * cols] }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(rows * cols, data.len(), "tensor data length does not match shape");
        Self { rows, cols, data }
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Self {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.as_ref().len(), cols, "ragged rows");
            data.extend_from_slice(r.as_ref());
        }
        Self { rows: rows.len(), cols, data }
    }

    pub fn row_vector(data: Vec<f64>) -> Self {
        Self { rows: 1, cols: data.len(), data }
    }

    pub fn scalar(x: f64) -> Self {
        Self { rows: 1, cols: 1, data: vec![x] }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn item(&self) -> f64 {
        assert_eq!(self.data.len(), 1, "item() on a non-scalar tensor");
        self.data[0]
    }

    fn add_assign(&mut self, other: &Tensor) {
        debug_assert_eq!(self.shape(), other.shape());
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }
}

/// `c += a · b` with optional transposed views; shapes are those of the views.
#[allow(clippy::too_many_arguments)]
fn gemm_acc(m: usize, k: usize, n: usize, a: &[f64], a_t: bool, b: &[f64], b_t: bool, c: &mut [f64]) {
    if m == 0 || k == 0 || n == 0 {
        return;
    }
    // a view is m×k: stored k-wide normally, m-wide when transposed
    let (rsa, csa) = if a_t { (1, m as isize) } else { (k as isize, 1) };
    let (rsb, csb) = if b_t { (1, k as isize) } else { (n as isize, 1) };
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.as_ptr(),
            rsa,
            csa,
            b.as_ptr(),
            rsb,
            csb,
            1.0,
            c.as_mut_ptr(),
            n as isize,
            1,
        );
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ParamId(pub usize);

/// Named trainable tensors.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParamStore {
    names: Vec<String>,
    tensors: Vec<Tensor>,
}

impl ParamStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, name: impl Into<String>, tensor: Tensor) -> ParamId {
        let name = name.into();
        assert!(!self.names.contains(&name), "duplicate parameter {name}");
        self.names.push(name);
        self.tensors.push(tensor);
        ParamId(self.tensors.len() - 1)
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    pub fn get(&self, id: ParamId) -> &Tensor {
        &self.tensors[id.0]
    }

    pub fn get_mut(&mut self, id: ParamId) -> &mut Tensor {
        &mut self.tensors[id.0]
    }

    pub fn name(&self, id: ParamId) -> &str {
        &self.names[id.0]
    }

    pub fn find(&self, name: &str) -> Option<ParamId> {
        self.names.iter().position(|n| n == name).map(ParamId)
    }

    pub fn iter(&self) -> impl Iterator<Item = (ParamId, &str, &Tensor)> {
        self.names.iter().zip(&self.tensors).enumerate().map(|(i, (n, t))| (ParamId(i), n.as_str(), t))
    }

    pub fn num_scalars(&self) -> usize {
        self.tensors.iter().map(Tensor::len).sum()
    }
}

/// Per-parameter gradients aligned with a [`ParamStore`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub grads: Vec<Tensor>,
}

impl Gradients {
    pub fn zeros_like(store: &ParamStore) -> Self {
        Self { grads: store.tensors.iter().map(|t| Tensor::zeros(t.rows, t.cols)).collect() }
    }

    pub fn add_assign(&mut self, other: &Gradients) {
        for (a, b) in self.grads.iter_mut().zip(&other.grads) {
            a.add_assign(b);
        }
    }

    pub fn scale(&mut self, s: f64) {
        for g in &mut self.grads {
            g.data.iter_mut().for_each(|x| *x *= s);
        }
    }

    pub fn norm(&self) -> f64 {
        self.grads.iter().flat_map(|g| &g.data).map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn get(&self, id: ParamId) -> &Tensor {
        &self.grads[id.0]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Var(usize);

#[derive(Debug, Clone)]
enum Op {
    Leaf,
    Param(ParamId),
    MatMul(Var, Var),
    Add(Var, Var),
    Sub(Var, Var),
    Mul(Var, Var),
    AddRow(Var, Var),
    MulCol(Var, Var),
    Scale(Var, f64),
    AddScalar(Var),
    Silu(Var),
    Sigmoid(Var),
    Softplus(Var),
    Exp(Var),
    Square(Var),
    Gather(Var, Vec<usize>),
    ScatterAdd(Var, Vec<usize>),
    ConcatCols(Vec<Var>),
    SliceCols(Var, usize),
    BroadcastRows(Var),
    MeanRows(Var),
    SumAll(Var),
    MeanAll(Var),
    CrossEntropy(Var, Tensor),
}

struct Node {
    value: Tensor,
    op: Op,
    requires_grad: bool,
}

pub struct Tape<'p> {
    store: &'p ParamStore,
    nodes: Vec<Node>,
    params: HashMap<ParamId, Var>,
}

fn sigmoid(x: f64) -> f64 {
    crate::schedule::logistic(x)
}

fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

impl<'p> Tape<'p> {
    pub fn new(store: &'p ParamStore) -> Self {
        Self { store, nodes: Vec::new(), params: HashMap::new() }
    }

    fn push(&mut self, value: Tensor, op: Op, requires_grad: bool) -> Var {
        self.nodes.push(Node { value, op, requires_grad });
        Var(self.nodes.len() - 1)
    }

    fn rg(&self, v: Var) -> bool {
        self.nodes[v.0].requires_grad
    }

    pub fn value(&self, v: Var) -> &Tensor {
        &self.nodes[v.0].value
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Input that receives no gradient.
    pub fn constant(&mut self, value: Tensor) -> Var {
        self.push(value, Op::Leaf, false)
    }

    /// Reads a parameter; repeated reads share one node.
    pub fn param(&mut self, id: ParamId) -> Var {
        if let Some(v) = self.params.get(&id) {
            return *v;
        }
        let v = self.push(self.store.get(id).clone(), Op::Param(id), true);
        self.params.insert(id, v);
        v
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Var {
        let (av, bv) = (self.value(a), self.value(b));
        assert_eq!(av.cols, bv.rows, "matmul shape mismatch {:?} x {:?}", av.shape(), bv.shape());
        let (m, k, n) = (av.rows, av.cols, bv.cols);
        let mut out = Tensor::zeros(m, n);
        gemm_acc(m, k, n, &av.data, false, &bv.data, false, &mut out.data);
        let rg = self.rg(a) || self.rg(b);
        self.push(out, Op::MatMul(a, b), rg)
    }

    fn zip_with(&mut self, a: Var, b: Var, f: impl Fn(f64, f64) -> f64, op: Op) -> Var {
        let (av, bv) = (self.value(a), self.value(b));
        assert_eq!(av.shape(), bv.shape(), "elementwise shape mismatch");
        let data = av.data.iter().zip(&bv.data).map(|(x, y)| f(*x, *y)).collect();
        let out = Tensor::from_vec(av.rows, av.cols, data);
        let rg = self.rg(a) || self.rg(b);
        self.push(out, op, rg)
    }

    pub fn add(&mut self, a: Var, b: Var) -> Var {
        self.zip_with(a, b, |x, y| x + y, Op::Add(a, b))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Var {
        self.zip_with(a, b, |x, y| x - y, Op::Sub(a, b))
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Var {
        self.zip_with(a, b, |x, y| x * y, Op::Mul(a, b))
    }

    /// `a[n×m] + b[1×m]` broadcast over rows.
    pub fn add_row(&mut self, a: Var, b: Var) -> Var {
        let (av, bv) = (self.value(a), self.value(b));
        assert!(bv.rows == 1 && bv.cols == av.cols, "add_row shape mismatch");
        let mut out = av.clone();
        for r in 0..out.rows {
            for (x, y) in out.data[r * out.cols..(r + 1) * out.cols].iter_mut().zip(&bv.data) {
                *x += y;
            }
        }
        let rg = self.rg(a) || self.rg(b);
        self.push(out, Op::AddRow(a, b), rg)
    }

    /// `a[n×m] * c[n×1]`, scaling each row.
    pub fn mul_col(&mut self, a: Var, c: Var) -> Var {
        let (av, cv) = (self.value(a), self.value(c));
        assert!(cv.cols == 1 && cv.rows == av.rows, "mul_col shape mismatch");
        let mut out = av.clone();
        for r in 0..out.rows {
            let s = cv.data[r];
            out.data[r * out.cols..(r + 1) * out.cols].iter_mut().for_each(|x| *x *= s);
        }
        let rg = self.rg(a) || self.rg(c);
        self.push(out, Op::MulCol(a, c), rg)
    }

    fn map(&mut self, a: Var, f: impl Fn(f64) -> f64, op: Op) -> Var {
        let av = self.value(a);
        let out = Tensor::from_vec(av.rows, av.cols, av.data.iter().map(|x| f(*x)).collect());
        let rg = self.rg(a);
        self.push(out, op, rg)
    }

    pub fn scale(&mut self, a: Var, s: f64) -> Var {
        self.map(a, |x| x * s, Op::Scale(a, s))
    }

    pub fn add_scalar(&mut self, a: Var, s: f64) -> Var {
        self.map(a, |x| x + s, Op::AddScalar(a))
    }

    pub fn silu(&mut self, a: Var) -> Var {
        self.map(a, |x| x * sigmoid(x), Op::Silu(a))
    }

    pub fn sigmoid(&mut self, a: Var) -> Var {
        self.map(a, sigmoid, Op::Sigmoid(a))
    }

    pub fn softplus(&mut self, a: Var) -> Var {
        self.map(a, softplus, Op::Softplus(a))
    }

    pub fn exp(&mut self, a: Var) -> Var {
        self.map(a, f64::exp, Op::Exp(a))
    }

    pub fn square(&mut self, a: Var) -> Var {
        self.map(a, |x| x * x, Op::Square(a))
    }

    /// Row `i` of the output is row `index[i]` of `a`.
    pub fn gather_rows(&mut self, a: Var, index: &[usize]) -> Var {
        let av = self.value(a);
        let mut out = Tensor::zeros(index.len(), av.cols);
        for (i, &src) in index.iter().enumerate() {
            out.data[i * av.cols..(i + 1) * av.cols].copy_from_slice(av.row(src));
        }
        let rg = self.rg(a);
        self.push(out, Op::Gather(a, index.to_vec()), rg)
    }

    /// Sums row `i` of `a` into output row `index[i]`; output has `rows` rows.
    pub fn scatter_add_rows(&mut self, a: Var, index: &[usize], rows: usize) -> Var {
        let av = self.value(a);
        assert_eq!(av.rows, index.len(), "scatter index length mismatch");
        let mut out = Tensor::zeros(rows, av.cols);
        for (i, &dst) in index.iter().enumerate() {
            for (x, y) in out.data[dst * av.cols..(dst + 1) * av.cols].iter_mut().zip(av.row(i)) {
                *x += y;
            }
        }
        let rg = self.rg(a);
        self.push(out, Op::ScatterAdd(a, index.to_vec()), rg)
    }

    pub fn concat_cols(&mut self, parts: &[Var]) -> Var {
        let rows = self.value(parts[0]).rows;
        let cols: usize = parts.iter().map(|p| self.value(*p).cols).sum();
        let mut out = Tensor::zeros(rows, cols);
        let mut offset = 0;
        for p in parts {
            let pv = self.value(*p);
            assert_eq!(pv.rows, rows, "concat_cols row mismatch");
            for r in 0..rows {
                out.data[r * cols + offset..r * cols + offset + pv.cols].copy_from_slice(pv.row(r));
            }
            offset += pv.cols;
        }
        let rg = parts.iter().any(|p| self.rg(*p));
        self.push(out, Op::ConcatCols(parts.to_vec()), rg)
    }

    pub fn slice_cols(&mut self, a: Var, start: usize, len: usize) -> Var {
        let av = self.value(a);
        assert!(start + len <= av.cols, "slice_cols out of range");
        let mut out = Tensor::zeros(av.rows, len);
        for r in 0..av.rows {
            out.data[r * len..(r + 1) * len].copy_from_slice(&av.row(r)[start..start + len]);
        }
        let rg = self.rg(a);
        self.push(out, Op::SliceCols(a, start), rg)
    }

    /// Repeats a `1×m` row `rows` times.
    pub fn broadcast_rows(&mut self, a: Var, rows: usize) -> Var {
        let av = self.value(a);
        assert_eq!(av.rows, 1, "broadcast_rows expects a row vector");
        let mut out = Tensor::zeros(rows, av.cols);
        for r in 0..rows {
            out.data[r * av.cols..(r + 1) * av.cols].copy_from_slice(&av.data);
        }
        let rg = self.rg(a);
        self.push(out, Op::BroadcastRows(a), rg)
    }

    pub fn mean_rows(&mut self, a: Var) -> Var {
        let av = self.value(a);
        let mut out = Tensor::zeros(1, av.cols);
        for r in 0..av.rows {
            for (x, y) in out.data.iter_mut().zip(av.row(r)) {
                *x += y;
            }
        }
        let inv = 1.0 / av.rows as f64;
        out.data.iter_mut().for_each(|x| *x *= inv);
        let rg = self.rg(a);
        self.push(out, Op::MeanRows(a), rg)
    }

    pub fn sum_all(&mut self, a: Var) -> Var {
        let s = self.value(a).data.iter().sum();
        let rg = self.rg(a);
        self.push(Tensor::scalar(s), Op::SumAll(a), rg)
    }

    pub fn mean_all(&mut self, a: Var) -> Var {
        let av = self.value(a);
        let s = av.data.iter().sum::<f64>() / av.len() as f64;
        let rg = self.rg(a);
        self.push(Tensor::scalar(s), Op::MeanAll(a), rg)
    }

    /// Mean over rows of `-Σ_k target[k] · log_softmax(logits)[k]`.
    pub fn cross_entropy(&mut self, logits: Var, target: Tensor) -> Var {
        let lv = self.value(logits);
        assert_eq!(lv.shape(), target.shape(), "cross_entropy shape mismatch");
        let mut total = 0.0;
        for r in 0..lv.rows {
            let row = lv.row(r);
            let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let lse = max + row.iter().map(|x| (x - max).exp()).sum::<f64>().ln();
            total -= row.iter().zip(target.row(r)).map(|(x, p)| p * (x - lse)).sum::<f64>();
        }
        let out = Tensor::scalar(total / lv.rows as f64);
        let rg = self.rg(logits);
        self.push(out, Op::CrossEntropy(logits, target), rg)
    }

    /// Reverse pass from a scalar node.
    pub fn backward(&self, loss: Var) -> Gradients {
        assert_eq!(self.value(loss).len(), 1, "backward from a non-scalar");
        let mut grads: Vec<Option<Tensor>> = vec![None; self.nodes.len()];
        grads[loss.0] = Some(Tensor::scalar(1.0));
        let mut out = Gradients::zeros_like(self.store);

        for i in (0..=loss.0).rev() {
            let Some(g) = grads[i].take() else { continue };
            let node = &self.nodes[i];
            if !node.requires_grad {
                continue;
            }
            match &node.op {
                Op::Leaf => {}
                Op::Param(id) => out.grads[id.0].add_assign(&g),
                Op::MatMul(a, b) => {
                    let (av, bv) = (self.value(*a), self.value(*b));
                    let (m, k, n) = (av.rows, av.cols, bv.cols);
                    if self.rg(*a) {
                        let mut da = Tensor::zeros(m, k);
                        gemm_acc(m, n, k, &g.data, false, &bv.data, true, &mut da.data);
                        accumulate(&mut grads, *a, da);
                    }
                    if self.rg(*b) {
                        let mut db = Tensor::zeros(k, n);
                        gemm_acc(k, m, n, &av.data, true, &g.data, false, &mut db.data);
                        accumulate(&mut grads, *b, db);
                    }
                }
                Op::Add(a, b) => {
                    self.send(&mut grads, *a, || g.clone());
                    self.send(&mut grads, *b, || g.clone());
                }
                Op::Sub(a, b) => {
                    self.send(&mut grads, *a, || g.clone());
                    self.send(&mut grads, *b, || neg(&g));
                }
                Op::Mul(a, b) => {
                    let (av, bv) = (self.value(*a), self.value(*b));
                    self.send(&mut grads, *a, || hadamard(&g, bv));
                    self.send(&mut grads, *b, || hadamard(&g, av));
                }
                Op::AddRow(a, b) => {
                    self.send(&mut grads, *a, || g.clone());
                    self.send(&mut grads, *b, || column_sums(&g));
                }
                Op::MulCol(a, c) => {
                    let (av, cv) = (self.value(*a), self.value(*c));
                    self.send(&mut grads, *a, || {
                        let mut d = g.clone();
                        for r in 0..d.rows {
                            let s = cv.data[r];
                            d.data[r * d.cols..(r + 1) * d.cols].iter_mut().for_each(|x| *x *= s);
                        }
                        d
                    });
                    self.send(&mut grads, *c, || {
                        let data = (0..g.rows).map(|r| g.row(r).iter().zip(av.row(r)).map(|(x, y)| x * y).sum()).collect();
                        Tensor::from_vec(g.rows, 1, data)
                    });
                }
                Op::Scale(a, s) => {
                    let s = *s;
                    self.send(&mut grads, *a, || map(&g, |x| x * s));
                }
                Op::AddScalar(a) => self.send(&mut grads, *a, || g.clone()),
                Op::Silu(a) => {
                    let av = self.value(*a);
                    self.send(&mut grads, *a, || {
                        zip_map(&g, av, |dy, x| {
                            let s = sigmoid(x);
                            dy * s * (1.0 + x * (1.0 - s))
                        })
                    });
                }
                Op::Sigmoid(a) => {
                    let yv = &node.value;
                    self.send(&mut grads, *a, || zip_map(&g, yv, |dy, y| dy * y * (1.0 - y)));
                }
                Op::Softplus(a) => {
                    let av = self.value(*a);
                    self.send(&mut grads, *a, || zip_map(&g, av, |dy, x| dy * sigmoid(x)));
                }
                Op::Exp(a) => {
                    let yv = &node.value;
                    self.send(&mut grads, *a, || zip_map(&g, yv, |dy, y| dy * y));
                }
                Op::Square(a) => {
                    let av = self.value(*a);
                    self.send(&mut grads, *a, || zip_map(&g, av, |dy, x| 2.0 * dy * x));
                }
                Op::Gather(a, index) => {
                    let av = self.value(*a);
                    self.send(&mut grads, *a, || {
                        let mut d = Tensor::zeros(av.rows, av.cols);
                        for (i, &src) in index.iter().enumerate() {
                            for (x, y) in d.data[src * av.cols..(src + 1) * av.cols].iter_mut().zip(g.row(i)) {
                                *x += y;
                            }
                        }
                        d
                    });
                }
                Op::ScatterAdd(a, index) => {
                    self.send(&mut grads, *a, || {
                        let mut d = Tensor::zeros(index.len(), g.cols);
                        for (i, &dst) in index.iter().enumerate() {
                            d.data[i * g.cols..(i + 1) * g.cols].copy_from_slice(g.row(dst));
                        }
                        d
                    });
                }
                Op::ConcatCols(parts) => {
                    let mut offset = 0;
                    for p in parts {
                        let cols = self.value(*p).cols;
                        self.send(&mut grads, *p, || {
                            let mut d = Tensor::zeros(g.rows, cols);
                            for r in 0..g.rows {
                                d.data[r * cols..(r + 1) * cols].copy_from_slice(&g.row(r)[offset..offset + cols]);
                            }
                            d
                        });
                        offset += cols;
                    }
                }
                Op::SliceCols(a, start) => {
                    let av = self.value(*a);
                    let start = *start;
                    self.send(&mut grads, *a, || {
                        let mut d = Tensor::zeros(av.rows, av.cols);
                        for r in 0..av.rows {
                            d.data[r * av.cols + start..r * av.cols + start + g.cols].copy_from_slice(g.row(r));
                        }
                        d
                    });
                }
                Op::BroadcastRows(a) => self.send(&mut grads, *a, || column_sums(&g)),
                Op::MeanRows(a) => {
                    let av = self.value(*a);
                    self.send(&mut grads, *a, || {
                        let inv = 1.0 / av.rows as f64;
                        let mut d = Tensor::zeros(av.rows, av.cols);
                        for r in 0..av.rows {
                            for (x, y) in d.data[r * av.cols..(r + 1) * av.cols].iter_mut().zip(&g.data) {
                                *x = y * inv;
                            }
                        }
                        d
                    });
                }
                Op::SumAll(a) => {
                    let av = self.value(*a);
                    let s = g.item();
                    self.send(&mut grads, *a, || Tensor::filled(av.rows, av.cols, s));
                }
                Op::MeanAll(a) => {
                    let av = self.value(*a);
                    let s = g.item() / av.len() as f64;
                    self.send(&mut grads, *a, || Tensor::filled(av.rows, av.cols, s));
                }
                Op::CrossEntropy(a, target) => {
                    let lv = self.value(*a);
                    let s = g.item() / lv.rows as f64;
                    self.send(&mut grads, *a, || {
                        let mut d = Tensor::zeros(lv.rows, lv.cols);
                        for r in 0..lv.rows {
                            let row = lv.row(r);
                            let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                            let sum: f64 = row.iter().map(|x| (x - max).exp()).sum();
                            let tsum: f64 = target.row(r).iter().sum();
                            for c in 0..lv.cols {
                                let p = (row[c] - max).exp() / sum;
                                d.data[r * lv.cols + c] = s * (tsum * p - target.get(r, c));
                            }
                        }
                        d
                    });
                }
            }
        }
        out
    }

    fn send(&self, grads: &mut [Option<Tensor>], target: Var, make: impl FnOnce() -> Tensor) {
        if self.rg(target) {
            accumulate(grads, target, make());
        }
    }
}

fn accumulate(grads: &mut [Option<Tensor>], v: Var, g: Tensor) {
    match &mut grads[v.0] {
        Some(existing) => existing.add_assign(&g),
        slot => *slot = Some(g),
    }
}

fn neg(t: &Tensor) -> Tensor {
    map(t, |x| -x)
}

fn map(t: &Tensor, f: impl Fn(f64) -> f64) -> Tensor {
    Tensor::from_vec(t.rows, t.cols, t.data.iter().map(|x| f(*x)).collect())
}

fn zip_map(a: &Tensor, b: &Tensor, f: impl Fn(f64, f64) -> f64) -> Tensor {
    Tensor::from_vec(a.rows, a.cols, a.data.iter().zip(&b.data).map(|(x, y)| f(*x, *y)).collect())
}

fn hadamard(a: &Tensor, b: &Tensor) -> Tensor {
    zip_map(a, b, |x, y| x * y)
}

fn column_sums(g: &Tensor) -> Tensor {
    let mut out = Tensor::zeros(1, g.cols);
    for r in 0..g.rows {
        for (x, y) in out.data.iter_mut().zip(g.row(r)) {
            *x += y;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Tensor {
        Tensor::from_vec(rows, cols, (0..rows * cols).map(|_| rng.random_range(-1.0..1.0)).collect())
    }

    /// Central finite differences over every parameter entry.
    fn check(store: &mut ParamStore, f: impl Fn(&mut Tape) -> Var) {
        let analytic = {
            let mut tape = Tape::new(store);
            let loss = f(&mut tape);
            tape.backward(loss)
        };
        let h = 1e-6;
        for p in 0..store.len() {
            for i in 0..store.get(ParamId(p)).len() {
                let orig = store.get(ParamId(p)).data[i];
                store.get_mut(ParamId(p)).data[i] = orig + h;
                let plus = {
                    let mut tape = Tape::new(store);
                    let l = f(&mut tape);
                    tape.value(l).item()
                };
                store.get_mut(ParamId(p)).data[i] = orig - h;
                let minus = {
                    let mut tape = Tape::new(store);
                    let l = f(&mut tape);
                    tape.value(l).item()
                };
                store.get_mut(ParamId(p)).data[i] = orig;
                let fd = (plus - minus) / (2.0 * h);
                let an = analytic.grads[p].data[i];
                assert!((fd - an).abs() <= 1e-6 * (1.0 + fd.abs()), "param {p}[{i}]: fd {fd} vs analytic {an}");
            }
        }
    }

    #[test]
    fn every_op_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut store = ParamStore::new();
        let a = store.add("a", random(4, 3, &mut rng));
        let b = store.add("b", random(3, 5, &mut rng));
        let bias = store.add("bias", random(1, 5, &mut rng));
        let col = store.add("col", random(4, 1, &mut rng));
        let target = Tensor::from_rows(&[[0.2, 0.8, 0.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0, 0.0]]);
        check(&mut store, |t| {
            let (a, b, bias, col) = (t.param(a), t.param(b), t.param(bias), t.param(col));
            let x = t.matmul(a, b);
            let x = t.add_row(x, bias);
            let x = t.silu(x);
            let y = t.mul_col(x, col);
            let y2 = t.sigmoid(y);
            let y3 = t.softplus(y);
            let s = t.sub(y2, y3);
            let m = t.mul(s, x);
            let g = t.gather_rows(m, &[0, 2, 2, 3, 1]);
            let sc = t.scatter_add_rows(g, &[1, 0, 1, 1, 0], 2);
            let e = t.exp(sc);
            let cat = t.concat_cols(&[e, sc]);
            let sl = t.slice_cols(cat, 3, 5);
            let ce = t.cross_entropy(sl, target.clone());
            let mr = t.mean_rows(m);
            let br = t.broadcast_rows(mr, 3);
            let sq = t.square(br);
            let sq = t.scale(sq, 0.7);
            let sq = t.add_scalar(sq, 1.5);
            let s1 = t.sum_all(sq);
            let s2 = t.mean_all(y);
            let tot = t.add(s1, s2);
            t.add(tot, ce)
        });
    }
}
