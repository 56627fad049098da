//! Min-sum message passing on the grid: loopy belief propagation with a
//! sequential or synchronous schedule, and sequential tree-reweighted
//! message passing with its lower bound.
//!
//! Messages are stored as `i32` per directed edge and label. Every stored
//! message is shifted so its minimum is zero, which bounds it by the largest
//! pairwise penalty.

mod bp;
mod transform;
mod trws;

pub use bp::{run_bp, Schedule};
pub use transform::message_update;
pub use trws::{run_trws, LowerBoundTrace};

use crate::energy::{Energy, GridEnergy, Labeling};
use thiserror::Error;
use transform::{normalize, DistanceTransform};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MessageError {
    #[error("cost vector has {found} entries, expected {expected}")]
    Length { expected: usize, found: usize },
}

/// Side of a pixel on which a neighbour lies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
    Up,
    Down,
}

impl Side {
    pub const ALL: [Side; 4] = [Side::Left, Side::Right, Side::Up, Side::Down];

    pub fn opposite(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
            Side::Up => Side::Down,
            Side::Down => Side::Up,
        }
    }

    fn slot(self) -> usize {
        self as usize
    }

    fn is_horizontal(self) -> bool {
        matches!(self, Side::Left | Side::Right)
    }

    /// Raster index of the neighbour of `p` on this side, if inside.
    #[inline]
    pub fn neighbor(self, p: usize, width: usize, height: usize) -> Option<usize> {
        let (r, c) = (p / width, p % width);
        match self {
            Side::Left => (c > 0).then(|| p - 1),
            Side::Right => (c + 1 < width).then(|| p + 1),
            Side::Up => (r > 0).then(|| p - width),
            Side::Down => (r + 1 < height).then(|| p + width),
        }
    }
}

/// Incoming messages for every pixel, one vector of label costs per side.
/// Messages across the image border stay zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MessageField {
    width: usize,
    height: usize,
    labels: usize,
    values: Vec<i32>,
}

impl MessageField {
    pub fn new(width: usize, height: usize, labels: usize) -> Self {
        Self {
            width,
            height,
            labels,
            values: vec![0; 4 * width * height * labels],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn label_count(&self) -> usize {
        self.labels
    }

    #[inline]
    fn offset(&self, p: usize, side: Side) -> usize {
        (side.slot() * self.width * self.height + p) * self.labels
    }

    /// The message arriving at `p` from its neighbour on `side`.
    #[inline]
    pub fn message(&self, p: usize, side: Side) -> &[i32] {
        let o = self.offset(p, side);
        &self.values[o..o + self.labels]
    }

    #[inline]
    fn store(&mut self, p: usize, side: Side, v: &[Energy]) {
        let o = self.offset(p, side);
        for (dst, &x) in self.values[o..o + self.labels].iter_mut().zip(v) {
            *dst = x as i32;
        }
    }

    /// Adds `c` to every entry of one message.
    pub fn shift(&mut self, p: usize, side: Side, c: i32) {
        let o = self.offset(p, side);
        for x in &mut self.values[o..o + self.labels] {
            *x += c;
        }
    }

    /// True when every message has minimum entry zero.
    pub fn is_normalized(&self) -> bool {
        self.values
            .chunks(self.labels.max(1))
            .all(|v| v.iter().min().is_none_or(|&x| x == 0))
    }

    /// `D_p + sum of incoming messages`, written into `out`.
    pub fn belief<M: GridEnergy>(&self, model: &M, p: usize, out: &mut [Energy]) {
        for (l, o) in out.iter_mut().enumerate() {
            *o = model.unary(p, l);
        }
        for side in Side::ALL {
            for (o, &x) in out.iter_mut().zip(self.message(p, side)) {
                *o += Energy::from(x);
            }
        }
    }

    /// Per-pixel argmin of the belief, ties to the smallest label.
    pub fn decode<M: GridEnergy>(&self, model: &M) -> Labeling {
        let n = self.width * self.height;
        let mut belief = vec![0; self.labels];
        let mut out = Vec::with_capacity(n);
        for p in 0..n {
            self.belief(model, p, &mut belief);
            out.push(argmin(&belief) as u16);
        }
        Labeling::new(self.width, self.height, out).expect("decoded shape matches model")
    }
}

#[inline]
pub(crate) fn argmin(v: &[Energy]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate().skip(1) {
        if x < v[best] {
            best = i;
        }
    }
    best
}

/// How a node's potential is divided among the messages it sends.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Weighting {
    /// Every message sees the full potential (ordinary BP).
    Full,
    /// The potential is split between the row chain and the column chain
    /// through the node: the row gets `floor(theta / 2)` and the column the
    /// rest. With only one kind of chain present that chain gets everything.
    Chains { rows: bool, cols: bool },
}

impl Weighting {
    pub(crate) fn for_grid(width: usize, height: usize) -> Self {
        Weighting::Chains {
            rows: width > 1,
            cols: height > 1,
        }
    }

    #[inline]
    pub(crate) fn row_share(self, theta: Energy) -> Energy {
        match self {
            Weighting::Full => theta,
            Weighting::Chains {
                rows: true,
                cols: true,
            } => theta.div_euclid(2),
            Weighting::Chains {
                rows: false,
                cols: true,
            } => 0,
            Weighting::Chains { .. } => theta,
        }
    }

    #[inline]
    fn share(self, theta: Energy, horizontal: bool) -> Energy {
        match self {
            Weighting::Full => theta,
            _ if horizontal => self.row_share(theta),
            _ => theta - self.row_share(theta),
        }
    }
}

/// Scratch state for computing messages out of one node at a time.
pub(crate) struct Sender<'a, M: GridEnergy> {
    model: &'a M,
    pub(crate) dt: DistanceTransform,
    weighting: Weighting,
    pub(crate) theta: Vec<Energy>,
    h: Vec<Energy>,
    pub(crate) out: Vec<Energy>,
}

impl<'a, M: GridEnergy> Sender<'a, M> {
    pub(crate) fn new(model: &'a M, weighting: Weighting) -> Self {
        assert!(
            model.smoothness().ceiling() <= Energy::from(i32::MAX),
            "pairwise penalties must fit in 32 bits"
        );
        let m = model.label_count();
        Self {
            model,
            dt: DistanceTransform::new(model.labels(), model.smoothness()),
            weighting,
            theta: vec![0; m],
            h: vec![0; m],
            out: vec![0; m],
        }
    }

    /// Loads the node potential of `p` from `field`.
    #[inline]
    pub(crate) fn load(&mut self, field: &MessageField, p: usize) {
        field.belief(self.model, p, &mut self.theta);
    }

    /// Computes the normalized message from the loaded node `p` to its
    /// neighbour on `side` into `self.out`.
    #[inline]
    pub(crate) fn emit(&mut self, field: &MessageField, p: usize, side: Side) {
        let back = field.message(p, side);
        let horizontal = side.is_horizontal();
        for ((h, &t), &b) in self.h.iter_mut().zip(&self.theta).zip(back) {
            *h = self.weighting.share(t, horizontal) - Energy::from(b);
        }
        self.dt.apply(&self.h, &mut self.out);
        normalize(&mut self.out);
    }

    /// Emits toward `side` and stores the result in `dst` at the receiver.
    #[inline]
    pub(crate) fn send(
        &mut self,
        src: &MessageField,
        dst: &mut MessageField,
        p: usize,
        side: Side,
    ) {
        if let Some(q) = side.neighbor(p, src.width, src.height) {
            self.emit(src, p, side);
            dst.store(q, side.opposite(), &self.out);
        }
    }

    /// In-place variant of [`Sender::send`].
    #[inline]
    pub(crate) fn send_in_place(&mut self, field: &mut MessageField, p: usize, side: Side) {
        if let Some(q) = side.neighbor(p, field.width, field.height) {
            self.emit(field, p, side);
            field.store(q, side.opposite(), &self.out);
        }
    }

    /// Forward raster sweep sending right and down, then a reverse sweep
    /// sending left and up, each node using the freshest messages.
    pub(crate) fn sequential_pass(&mut self, field: &mut MessageField) {
        let n = field.width * field.height;
        for p in 0..n {
            self.load(field, p);
            self.send_in_place(field, p, Side::Right);
            self.send_in_place(field, p, Side::Down);
        }
        for p in (0..n).rev() {
            self.load(field, p);
            self.send_in_place(field, p, Side::Left);
            self.send_in_place(field, p, Side::Up);
        }
    }
}

/// Relative change test used to stop message passing early.
pub(crate) fn settled(previous: Energy, current: Energy, tolerance: f64) -> bool {
    tolerance > 0.0
        && ((previous - current).abs() as f64) < tolerance * (previous.abs().max(1) as f64)
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::moves::testutil::*;

    #[test]
    fn side_geometry() {
        assert_eq!(Side::Left.neighbor(4, 3, 3), Some(3));
        assert_eq!(Side::Down.neighbor(4, 3, 3), Some(7));
        assert_eq!(Side::Up.neighbor(1, 3, 3), None);
        assert_eq!(Side::Right.neighbor(2, 3, 3), None);
        for s in Side::ALL {
            assert_eq!(s.opposite().opposite(), s);
        }
    }

    #[test]
    fn chain_split_shares_add_up() {
        let both = Weighting::for_grid(3, 3);
        for t in [-7, -1, 0, 1, 8, 13] {
            assert_eq!(both.share(t, true) + both.share(t, false), t);
            assert!((both.share(t, true) - both.share(t, false)).abs() <= 1);
        }
        let row = Weighting::for_grid(5, 1);
        assert_eq!(row.share(9, true), 9);
        let col = Weighting::for_grid(1, 5);
        assert_eq!(col.share(9, false), 9);
    }

    #[test]
    fn decode_ignores_constant_shifts() {
        let mut rng = seeded(31);
        let model = random_table(&mut rng, 4, 3, 5, Default::default());
        let mut field = MessageField::new(4, 3, 5);
        let mut sender = Sender::new(&model, Weighting::Full);
        sender.sequential_pass(&mut field);
        sender.sequential_pass(&mut field);
        assert!(field.is_normalized());
        let before = field.decode(&model);
        field.shift(5, Side::Left, 17);
        field.shift(0, Side::Down, 3);
        field.shift(11, Side::Up, 1000);
        assert!(!field.is_normalized());
        assert_eq!(field.decode(&model), before);
    }

    #[test]
    fn settled_rule() {
        assert!(settled(100_000, 99_995, 1e-4));
        assert!(!settled(100_000, 99_000, 1e-4));
        assert!(!settled(5, 5, 0.0));
    }
}
