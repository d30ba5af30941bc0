//! Flat postorder form of an expression tree for fast jet evaluation.
//!
//! Each instruction writes its jet into its own slot of one contiguous buffer
//! laid out as `[value, gradient.., hessian..]`. Any failure is reported as a
//! bare `None`; the caller re-runs the tree walk to name the failing subterm.

use std::cell::RefCell;

use super::{pow_derivatives, Func, Jet, Node};

thread_local! {
    // Reused across calls; every instruction overwrites its whole slot.
    static SCRATCH: RefCell<Vec<f64>> = const { RefCell::new(Vec::new()) };
}

#[derive(Debug, Clone, PartialEq)]
enum Op {
    Const(f64),
    Var(usize),
    Neg(usize),
    Shift(usize, f64),
    Scale(usize, f64),
    Add(usize, usize),
    Sub(usize, usize),
    Mul(usize, usize),
    Div(usize, usize),
    Pow(usize, f64),
    Call(Func, usize),
}

#[derive(Debug, Clone, PartialEq)]
pub(super) struct Tape {
    ops: Vec<Op>,
}

impl Tape {
    pub(super) fn compile(root: &Node) -> Tape {
        let mut ops = Vec::new();
        emit(root, &mut ops);
        Tape { ops }
    }

    pub(super) fn jet(&self, point: &[f64]) -> Option<Jet> {
        match point.len() {
            1 => self.run_fixed::<1>(point),
            2 => self.run_fixed::<2>(point),
            3 => self.run_fixed::<3>(point),
            4 => self.run_fixed::<4>(point),
            _ => SCRATCH.with(|scratch| self.run(point, &mut scratch.borrow_mut())),
        }
    }

    /// Same evaluation with the dimension known at compile time.
    fn run_fixed<const N: usize>(&self, point: &[f64]) -> Option<Jet> {
        let mut slots: Vec<Slot<N>> = Vec::with_capacity(self.ops.len());
        for op in &self.ops {
            let out = match *op {
                Op::Const(c) => Slot::constant(c),
                Op::Var(i) => {
                    let mut v = Slot::constant(point[i]);
                    v.g[i] = 1.0;
                    v
                }
                Op::Neg(a) => slots[a].map(|x| -x),
                Op::Scale(a, c) => slots[a].map(|x| x * c),
                Op::Shift(a, c) => {
                    let mut v = slots[a];
                    v.v += c;
                    v
                }
                Op::Add(a, b) => slots[a].zip(&slots[b], |x, y| x + y),
                Op::Sub(a, b) => slots[a].zip(&slots[b], |x, y| x - y),
                Op::Mul(a, b) => slots[a].mul(&slots[b]),
                Op::Div(a, b) => {
                    if slots[b].v == 0.0 {
                        return None;
                    }
                    slots[a].div(&slots[b])
                }
                Op::Pow(a, p) => {
                    let (f0, f1, f2) = pow_derivatives(slots[a].v, p).ok()?;
                    slots[a].chain(f0, f1, f2)
                }
                Op::Call(f, a) => {
                    let x = slots[a].v;
                    f.check_domain(x).ok()?;
                    let (f0, f1, f2) = f.derivatives(x);
                    slots[a].chain(f0, f1, f2)
                }
            };
            if !out.is_finite() {
                return None;
            }
            slots.push(out);
        }
        let root = slots.last()?;
        Some(Jet {
            value: root.v,
            gradient: root.g.iter().copied().collect(),
            hessian: root.h.iter().flatten().copied().collect(),
        })
    }

    fn run(&self, point: &[f64], buf: &mut Vec<f64>) -> Option<Jet> {
        let n = point.len();
        let s = 1 + n + n * n;
        let need = s * self.ops.len();
        if buf.len() < need {
            buf.resize(need, 0.0);
        }
        for (k, op) in self.ops.iter().enumerate() {
            let (done, rest) = buf.split_at_mut(k * s);
            let dst = &mut rest[..s];
            let slot = |i: usize| &done[i * s..(i + 1) * s];
            match *op {
                Op::Const(c) => {
                    dst.fill(0.0);
                    dst[0] = c;
                }
                Op::Var(i) => {
                    dst.fill(0.0);
                    dst[0] = point[i];
                    dst[1 + i] = 1.0;
                }
                Op::Neg(a) => dst.iter_mut().zip(slot(a)).for_each(|(d, x)| *d = -x),
                Op::Scale(a, c) => dst.iter_mut().zip(slot(a)).for_each(|(d, x)| *d = x * c),
                Op::Shift(a, c) => {
                    dst.copy_from_slice(slot(a));
                    dst[0] += c;
                }
                Op::Add(a, b) => {
                    let (a, b) = (slot(a), slot(b));
                    for i in 0..s {
                        dst[i] = a[i] + b[i];
                    }
                }
                Op::Sub(a, b) => {
                    let (a, b) = (slot(a), slot(b));
                    for i in 0..s {
                        dst[i] = a[i] - b[i];
                    }
                }
                Op::Mul(a, b) => mul(dst, slot(a), slot(b), n),
                Op::Div(a, b) => {
                    if slot(b)[0] == 0.0 {
                        return None;
                    }
                    div(dst, slot(a), slot(b), n);
                }
                Op::Pow(a, p) => {
                    let x = slot(a);
                    let (f0, f1, f2) = pow_derivatives(x[0], p).ok()?;
                    chain(dst, x, f0, f1, f2, n);
                }
                Op::Call(f, a) => {
                    let x = slot(a);
                    f.check_domain(x[0]).ok()?;
                    let (f0, f1, f2) = f.derivatives(x[0]);
                    chain(dst, x, f0, f1, f2, n);
                }
            }
            if !dst.iter().all(|v| v.is_finite()) {
                return None;
            }
        }
        let root = &buf[need - s..need];
        Some(Jet {
            value: root[0],
            gradient: root[1..1 + n].into(),
            hessian: root[1 + n..].into(),
        })
    }
}

/// Jet of fixed dimension; Hessians are kept exactly symmetric.
#[derive(Clone, Copy)]
struct Slot<const N: usize> {
    v: f64,
    g: [f64; N],
    h: [[f64; N]; N],
}

impl<const N: usize> Slot<N> {
    fn constant(v: f64) -> Self {
        Slot { v, g: [0.0; N], h: [[0.0; N]; N] }
    }

    fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Slot { v: f(self.v), g: self.g.map(&f), h: self.h.map(|row| row.map(&f)) }
    }

    fn zip(&self, o: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut out = *self;
        out.v = f(self.v, o.v);
        for i in 0..N {
            out.g[i] = f(self.g[i], o.g[i]);
            for j in 0..N {
                out.h[i][j] = f(self.h[i][j], o.h[i][j]);
            }
        }
        out
    }

    fn chain(&self, f0: f64, f1: f64, f2: f64) -> Self {
        let mut out = Slot::constant(f0);
        for i in 0..N {
            out.g[i] = f1 * self.g[i];
            for j in i..N {
                let v = f1 * self.h[i][j] + f2 * self.g[i] * self.g[j];
                out.h[i][j] = v;
                out.h[j][i] = v;
            }
        }
        out
    }

    fn mul(&self, o: &Self) -> Self {
        let (a, b) = (self.v, o.v);
        let mut out = Slot::constant(a * b);
        for i in 0..N {
            out.g[i] = a * o.g[i] + b * self.g[i];
            for j in i..N {
                let v = a * o.h[i][j] + b * self.h[i][j] + (self.g[i] * o.g[j] + o.g[i] * self.g[j]);
                out.h[i][j] = v;
                out.h[j][i] = v;
            }
        }
        out
    }

    fn div(&self, o: &Self) -> Self {
        let b = o.v;
        let q = self.v / b;
        let mut out = Slot::constant(q);
        for i in 0..N {
            out.g[i] = (self.g[i] - q * o.g[i]) / b;
        }
        for i in 0..N {
            for j in i..N {
                let v = (self.h[i][j] - q * o.h[i][j] - (out.g[i] * o.g[j] + o.g[i] * out.g[j])) / b;
                out.h[i][j] = v;
                out.h[j][i] = v;
            }
        }
        out
    }

    fn is_finite(&self) -> bool {
        self.v.is_finite()
            && self.g.iter().all(|x| x.is_finite())
            && self.h.iter().flatten().all(|x| x.is_finite())
    }
}

fn emit(node: &Node, ops: &mut Vec<Op>) -> usize {
    let op = match node {
        Node::Const(_) | Node::Pi | Node::E => Op::Const(node.literal().unwrap_or_default()),
        Node::Var(i) => Op::Var(*i),
        Node::Neg(a) => Op::Neg(emit(a, ops)),
        Node::Add(a, b) => match (a.literal(), b.literal()) {
            (_, Some(c)) => Op::Shift(emit(a, ops), c),
            (Some(c), _) => Op::Shift(emit(b, ops), c),
            _ => Op::Add(emit(a, ops), emit(b, ops)),
        },
        Node::Sub(a, b) => Op::Sub(emit(a, ops), emit(b, ops)),
        Node::Mul(a, b) => match (a.literal(), b.literal()) {
            (Some(c), _) => Op::Scale(emit(b, ops), c),
            (_, Some(c)) => Op::Scale(emit(a, ops), c),
            _ => Op::Mul(emit(a, ops), emit(b, ops)),
        },
        Node::Div(a, b) => Op::Div(emit(a, ops), emit(b, ops)),
        Node::Pow(a, p) => Op::Pow(emit(a, ops), *p),
        Node::Call(f, a) => Op::Call(*f, emit(a, ops)),
    };
    ops.push(op);
    ops.len() - 1
}

fn chain(dst: &mut [f64], x: &[f64], f0: f64, f1: f64, f2: f64, n: usize) {
    let (g, h) = x[1..].split_at(n);
    for i in 0..n {
        for j in 0..n {
            let k = i * n + j;
            dst[1 + n + k] = f1 * h[k] + f2 * g[i] * g[j];
        }
        dst[1 + i] = f1 * g[i];
    }
    dst[0] = f0;
}

fn mul(dst: &mut [f64], a: &[f64], b: &[f64], n: usize) {
    let (av, bv) = (a[0], b[0]);
    let (ag, ah) = a[1..].split_at(n);
    let (bg, bh) = b[1..].split_at(n);
    for i in 0..n {
        for j in 0..n {
            let k = i * n + j;
            dst[1 + n + k] = av * bh[k] + bv * ah[k] + (ag[i] * bg[j] + bg[i] * ag[j]);
        }
        dst[1 + i] = av * bg[i] + bv * ag[i];
    }
    dst[0] = av * bv;
}

fn div(dst: &mut [f64], a: &[f64], b: &[f64], n: usize) {
    let bv = b[0];
    let q = a[0] / bv;
    let (ag, ah) = a[1..].split_at(n);
    let (bg, bh) = b[1..].split_at(n);
    let (dv, dh) = dst[1..].split_at_mut(n);
    for i in 0..n {
        dv[i] = (ag[i] - q * bg[i]) / bv;
    }
    for i in 0..n {
        for j in 0..n {
            let k = i * n + j;
            dh[k] = (ah[k] - q * bh[k] - (dv[i] * bg[j] + bg[i] * dv[j])) / bv;
        }
    }
    dst[0] = q;
}
