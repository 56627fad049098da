//! Min-convolution of a cost vector with the truncated potential in `O(m)`.

use super::MessageError;
use crate::energy::{Energy, LabelSet, Smoothness};

/// Reusable scratch space for min-convolutions over one label set.
#[derive(Debug, Clone)]
pub(crate) struct DistanceTransform {
    positions: Vec<i64>,
    lambda: i64,
    exponent: u32,
    cap: Energy,
    envelope: Vec<usize>,
    // breakpoints as fractions (numerator, positive denominator)
    bounds: Vec<(i128, i128)>,
}

impl DistanceTransform {
    pub(crate) fn new(labels: &LabelSet, smoothness: &Smoothness) -> Self {
        let m = labels.len();
        Self {
            positions: labels.values().iter().map(|&v| i64::from(v)).collect(),
            lambda: i64::from(smoothness.lambda()),
            exponent: smoothness.exponent(),
            cap: smoothness.ceiling(),
            envelope: vec![0; m],
            bounds: vec![(0, 1); m],
        }
    }

    /// `out(q) = min_p h(p) + V(p, q)`, unnormalized.
    pub(crate) fn apply(&mut self, h: &[Energy], out: &mut [Energy]) {
        let m = self.positions.len();
        debug_assert!(h.len() == m && out.len() == m);
        let floor = *h.iter().min().expect("label set is never empty");
        if self.lambda == 0 {
            out.fill(floor);
            return;
        }
        if self.exponent == 1 {
            self.linear(h, out);
        } else {
            self.quadratic(h, out);
        }
        let cap = floor + self.cap;
        for o in out.iter_mut() {
            *o = (*o).min(cap);
        }
    }

    fn linear(&self, h: &[Energy], out: &mut [Energy]) {
        let x = &self.positions;
        out.copy_from_slice(h);
        for i in 1..out.len() {
            out[i] = out[i].min(out[i - 1] + self.lambda * (x[i] - x[i - 1]));
        }
        for i in (0..out.len() - 1).rev() {
            out[i] = out[i].min(out[i + 1] + self.lambda * (x[i + 1] - x[i]));
        }
    }

    /// Lower envelope of the parabolas `h(p) + lambda * (x - x_p)^2`.
    fn quadratic(&mut self, h: &[Energy], out: &mut [Energy]) {
        let x = &self.positions;
        let lam = i128::from(self.lambda);
        let lift = |i: usize| i128::from(h[i]) + lam * i128::from(x[i]) * i128::from(x[i]);
        let cross = |i: usize, j: usize| -> (i128, i128) {
            (lift(j) - lift(i), 2 * lam * i128::from(x[j] - x[i]))
        };
        let env = &mut self.envelope;
        let bounds = &mut self.bounds;
        let mut top = 0;
        env[0] = 0;
        for j in 1..x.len() {
            let mut s = cross(env[top], j);
            while top > 0 {
                let z = bounds[top];
                if s.0 * z.1 <= z.0 * s.1 {
                    top -= 1;
                    s = cross(env[top], j);
                } else {
                    break;
                }
            }
            top += 1;
            env[top] = j;
            bounds[top] = s;
        }
        let mut k = 0;
        for (q, o) in out.iter_mut().enumerate() {
            let xq = i128::from(x[q]);
            while k < top && bounds[k + 1].0 < xq * bounds[k + 1].1 {
                k += 1;
            }
            let p = env[k];
            let d = x[q] - x[p];
            *o = h[p] + self.lambda * d * d;
        }
    }
}

/// Subtracts the minimum so the smallest entry is zero.
#[inline]
pub(crate) fn normalize(v: &mut [Energy]) -> Energy {
    let floor = *v.iter().min().expect("label set is never empty");
    for x in v.iter_mut() {
        *x -= floor;
    }
    floor
}

/// One min-sum message: `out(l_q) = min_{l_p} h(l_p) + V(l_p, l_q)` with
/// `h = data + sum(incoming)`, normalized to a minimum of zero.
///
/// `incoming` should already exclude the message coming back along the edge
/// being updated.
pub fn message_update(
    data: &[Energy],
    incoming: &[&[Energy]],
    labels: &LabelSet,
    smoothness: &Smoothness,
) -> Result<Vec<Energy>, MessageError> {
    let m = labels.len();
    if data.len() != m {
        return Err(MessageError::Length {
            expected: m,
            found: data.len(),
        });
    }
    let mut h = data.to_vec();
    for msg in incoming {
        if msg.len() != m {
            return Err(MessageError::Length {
                expected: m,
                found: msg.len(),
            });
        }
        for (a, b) in h.iter_mut().zip(msg.iter()) {
            *a += b;
        }
    }
    let mut dt = DistanceTransform::new(labels, smoothness);
    let mut out = vec![0; m];
    dt.apply(&h, &mut out);
    normalize(&mut out);
    Ok(out)
}
