use std::sync::atomic::{AtomicU32, Ordering};

/// Row-major `f32` matrix shared between training threads without locks.
///
/// Every scalar is an `AtomicU32` holding the float's bits, accessed with
/// relaxed ordering. Concurrent updates to the same row may lose writes
/// (Hogwild-style), but no read ever observes a torn element.
pub(crate) struct HogwildTable {
    data: Vec<AtomicU32>,
    dim: usize,
}

impl HogwildTable {
    pub fn new(values: Vec<f32>, dim: usize) -> Self {
        debug_assert_eq!(values.len() % dim, 0);
        HogwildTable {
            data: values.into_iter().map(|v| AtomicU32::new(v.to_bits())).collect(),
            dim,
        }
    }

    #[inline]
    fn row(&self, row: usize) -> &[AtomicU32] {
        &self.data[row * self.dim..(row + 1) * self.dim]
    }

    #[inline]
    pub fn read_row(&self, row: usize, out: &mut [f32]) {
        for (o, a) in out.iter_mut().zip(self.row(row)) {
            *o = f32::from_bits(a.load(Ordering::Relaxed));
        }
    }

    /// `row += scale * v`
    #[inline]
    pub fn add_scaled(&self, row: usize, scale: f32, v: &[f32]) {
        for (a, x) in self.row(row).iter().zip(v) {
            let cur = f32::from_bits(a.load(Ordering::Relaxed));
            a.store((cur + scale * x).to_bits(), Ordering::Relaxed);
        }
    }

    pub fn into_vec(self) -> Vec<f32> {
        self.data
            .into_iter()
            .map(|a| f32::from_bits(a.into_inner()))
            .collect()
    }
}
