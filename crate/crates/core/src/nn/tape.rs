//! Reverse-mode differentiation over dense `f64` matrices.
//!
//! A [`Tape`] records every operation of one forward pass; [`Tape::backward`]
//! walks it in reverse and returns the gradient of a scalar (1x1) output
//! with respect to every recorded node. Column vectors are `n x 1`, row
//! vectors `1 x d`.

use ndarray::{Array2, Axis, Zip};

/// Handle to a node on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Var(usize);

#[derive(Debug, Clone)]
enum Op {
    Leaf,
    MatMul(Var, Var),
    Transpose(Var),
    Add(Var, Var),
    Sub(Var, Var),
    Mul(Var, Var),
    /// `n x d` plus a `1 x d` row broadcast over rows.
    AddRow(Var, Var),
    /// `1 x d` repeated `n` times.
    BroadcastRows(Var),
    /// `n x d` scaled row-wise by an `n x 1` column.
    MulCol(Var, Var),
    Affine(Var, f64),
    Recip(Var),
    Tanh(Var),
    Relu(Var),
    Exp(Var),
    Log(Var),
    Sqrt(Var),
    Atanh(Var),
    MinConst(Var, f64),
    MaxConst(Var, f64),
    MaskMul(Var, Array2<f64>),
    RowSum(Var),
    SumAll(Var),
}

#[derive(Debug, Clone)]
struct Node {
    value: Array2<f64>,
    op: Op,
}

#[derive(Debug, Default, Clone)]
pub struct Tape {
    nodes: Vec<Node>,
}

/// Gradients of one backward pass, indexed by [`Var`].
#[derive(Debug)]
pub struct Gradients {
    grads: Vec<Option<Array2<f64>>>,
    shapes: Vec<(usize, usize)>,
}

impl Gradients {
    /// Gradient with respect to `v` (zeros if `v` does not influence the output).
    pub fn wrt(&self, v: Var) -> Array2<f64> {
        self.grads[v.0]
            .clone()
            .unwrap_or_else(|| Array2::zeros(self.shapes[v.0]))
    }
}

fn shape(a: &Array2<f64>) -> (usize, usize) {
    (a.nrows(), a.ncols())
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, value: Array2<f64>, op: Op) -> Var {
        self.nodes.push(Node { value, op });
        Var(self.nodes.len() - 1)
    }

    pub fn value(&self, v: Var) -> &Array2<f64> {
        &self.nodes[v.0].value
    }

    /// Scalar value of a 1x1 node.
    pub fn scalar(&self, v: Var) -> f64 {
        let value = self.value(v);
        assert_eq!(shape(value), (1, 1), "not a scalar node");
        value[[0, 0]]
    }

    pub fn leaf(&mut self, value: Array2<f64>) -> Var {
        self.push(value, Op::Leaf)
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Var {
        let value = self.value(a).dot(self.value(b));
        self.push(value, Op::MatMul(a, b))
    }

    pub fn transpose(&mut self, a: Var) -> Var {
        let value = self.value(a).t().to_owned();
        self.push(value, Op::Transpose(a))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Var {
        let value = self.value(a) + self.value(b);
        self.push(value, Op::Add(a, b))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Var {
        let value = self.value(a) - self.value(b);
        self.push(value, Op::Sub(a, b))
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Var {
        let value = self.value(a) * self.value(b);
        self.push(value, Op::Mul(a, b))
    }

    pub fn add_row(&mut self, a: Var, row: Var) -> Var {
        assert_eq!(self.value(row).nrows(), 1, "add_row expects a 1 x d row");
        let value = self.value(a) + self.value(row);
        self.push(value, Op::AddRow(a, row))
    }

    pub fn broadcast_rows(&mut self, row: Var, n: usize) -> Var {
        let r = self.value(row);
        assert_eq!(r.nrows(), 1, "broadcast_rows expects a 1 x d row");
        let value = r.broadcast((n, r.ncols())).expect("row broadcast").to_owned();
        self.push(value, Op::BroadcastRows(row))
    }

    pub fn mul_col(&mut self, a: Var, col: Var) -> Var {
        assert_eq!(self.value(col).ncols(), 1, "mul_col expects an n x 1 column");
        let value = self.value(a) * self.value(col);
        self.push(value, Op::MulCol(a, col))
    }

    /// `scale * a + shift`.
    pub fn affine(&mut self, a: Var, scale: f64, shift: f64) -> Var {
        let value = self.value(a).mapv(|x| scale * x + shift);
        self.push(value, Op::Affine(a, scale))
    }

    pub fn scale(&mut self, a: Var, k: f64) -> Var {
        self.affine(a, k, 0.0)
    }

    pub fn recip(&mut self, a: Var) -> Var {
        let value = self.value(a).mapv(f64::recip);
        self.push(value, Op::Recip(a))
    }

    pub fn tanh(&mut self, a: Var) -> Var {
        let value = self.value(a).mapv(f64::tanh);
        self.push(value, Op::Tanh(a))
    }

    /// ReLU; the subgradient at 0 is taken as 0.
    pub fn relu(&mut self, a: Var) -> Var {
        let value = self.value(a).mapv(|x| x.max(0.0));
        self.push(value, Op::Relu(a))
    }

    pub fn exp(&mut self, a: Var) -> Var {
        let value = self.value(a).mapv(f64::exp);
        self.push(value, Op::Exp(a))
    }

    pub fn log(&mut self, a: Var) -> Var {
        let value = self.value(a).mapv(f64::ln);
        self.push(value, Op::Log(a))
    }

    pub fn sqrt(&mut self, a: Var) -> Var {
        let value = self.value(a).mapv(f64::sqrt);
        self.push(value, Op::Sqrt(a))
    }

    pub fn atanh(&mut self, a: Var) -> Var {
        let value = self.value(a).mapv(f64::atanh);
        self.push(value, Op::Atanh(a))
    }

    /// `min(a, k)` entrywise; gradient flows where `a < k`.
    pub fn min_const(&mut self, a: Var, k: f64) -> Var {
        let value = self.value(a).mapv(|x| x.min(k));
        self.push(value, Op::MinConst(a, k))
    }

    /// `max(a, k)` entrywise; gradient flows where `a > k`.
    pub fn max_const(&mut self, a: Var, k: f64) -> Var {
        let value = self.value(a).mapv(|x| x.max(k));
        self.push(value, Op::MaxConst(a, k))
    }

    /// Entrywise product with a constant matrix (masks, dropout, weights).
    pub fn mask_mul(&mut self, a: Var, mask: Array2<f64>) -> Var {
        let value = self.value(a) * &mask;
        self.push(value, Op::MaskMul(a, mask))
    }

    /// Row sums as an `n x 1` column.
    pub fn row_sum(&mut self, a: Var) -> Var {
        let value = self.value(a).sum_axis(Axis(1)).insert_axis(Axis(1));
        self.push(value, Op::RowSum(a))
    }

    pub fn sum_all(&mut self, a: Var) -> Var {
        let value = Array2::from_elem((1, 1), self.value(a).sum());
        self.push(value, Op::SumAll(a))
    }

    /// Reverse sweep from the scalar node `out`.
    pub fn backward(&self, out: Var) -> Gradients {
        assert_eq!(shape(self.value(out)), (1, 1), "backward needs a scalar output");
        let mut grads: Vec<Option<Array2<f64>>> = vec![None; self.nodes.len()];
        grads[out.0] = Some(Array2::ones((1, 1)));
        for idx in (0..=out.0).rev() {
            let Some(g) = grads[idx].take() else { continue };
            let node = &self.nodes[idx];
            let mut acc = |v: Var, contrib: Array2<f64>| match &mut grads[v.0] {
                Some(existing) => *existing += &contrib,
                slot @ None => *slot = Some(contrib),
            };
            match &node.op {
                Op::Leaf => {}
                Op::MatMul(a, b) => {
                    let av = &self.nodes[a.0].value;
                    let bv = &self.nodes[b.0].value;
                    acc(*a, g.dot(&bv.t()));
                    acc(*b, av.t().dot(&g));
                }
                Op::Transpose(a) => acc(*a, g.t().to_owned()),
                Op::Add(a, b) => {
                    acc(*a, g.clone());
                    acc(*b, g.clone());
                }
                Op::Sub(a, b) => {
                    acc(*a, g.clone());
                    acc(*b, -&g);
                }
                Op::Mul(a, b) => {
                    acc(*a, &g * &self.nodes[b.0].value);
                    acc(*b, &g * &self.nodes[a.0].value);
                }
                Op::AddRow(a, row) => {
                    acc(*row, g.sum_axis(Axis(0)).insert_axis(Axis(0)));
                    acc(*a, g.clone());
                }
                Op::BroadcastRows(row) => acc(*row, g.sum_axis(Axis(0)).insert_axis(Axis(0))),
                Op::MulCol(a, col) => {
                    let av = &self.nodes[a.0].value;
                    let cv = &self.nodes[col.0].value;
                    acc(*col, (&g * av).sum_axis(Axis(1)).insert_axis(Axis(1)));
                    acc(*a, &g * cv);
                }
                Op::Affine(a, scale) => acc(*a, g.mapv(|x| x * scale)),
                Op::Recip(a) => {
                    let y = &node.value;
                    acc(*a, Zip::from(&g).and(y).map_collect(|g, y| -g * y * y));
                }
                Op::Tanh(a) => {
                    let y = &node.value;
                    acc(*a, Zip::from(&g).and(y).map_collect(|g, y| g * (1.0 - y * y)));
                }
                Op::Relu(a) => {
                    let x = &self.nodes[a.0].value;
                    acc(*a, Zip::from(&g).and(x).map_collect(|g, x| if *x > 0.0 { *g } else { 0.0 }));
                }
                Op::Exp(a) => acc(*a, &g * &node.value),
                Op::Log(a) => {
                    let x = &self.nodes[a.0].value;
                    acc(*a, &g / x);
                }
                Op::Sqrt(a) => {
                    let y = &node.value;
                    acc(*a, Zip::from(&g).and(y).map_collect(|g, y| 0.5 * g / y));
                }
                Op::Atanh(a) => {
                    let x = &self.nodes[a.0].value;
                    acc(*a, Zip::from(&g).and(x).map_collect(|g, x| g / (1.0 - x * x)));
                }
                Op::MinConst(a, k) => {
                    let x = &self.nodes[a.0].value;
                    acc(*a, Zip::from(&g).and(x).map_collect(|g, x| if *x < *k { *g } else { 0.0 }));
                }
                Op::MaxConst(a, k) => {
                    let x = &self.nodes[a.0].value;
                    acc(*a, Zip::from(&g).and(x).map_collect(|g, x| if *x > *k { *g } else { 0.0 }));
                }
                Op::MaskMul(a, mask) => acc(*a, &g * mask),
                Op::RowSum(a) => {
                    let cols = self.nodes[a.0].value.ncols();
                    let rows = g.nrows();
                    acc(*a, g.broadcast((rows, cols)).expect("column broadcast").to_owned());
                }
                Op::SumAll(a) => {
                    let s = g[[0, 0]];
                    acc(*a, Array2::from_elem(shape(&self.nodes[a.0].value), s));
                }
            }
            grads[idx] = Some(g);
        }
        Gradients {
            grads,
            shapes: self.nodes.iter().map(|n| shape(&n.value)).collect(),
        }
    }
}
