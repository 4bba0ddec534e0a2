use crate::equivariant_nn::ParamStore;

/// RMSprop with a running mean of squared gradients per coordinate.
#[derive(Clone, Debug)]
pub struct Rmsprop {
    pub lr: f32,
    pub alpha: f32,
    pub eps: f32,
    square_avg: Vec<Vec<f32>>,
}

impl Rmsprop {
    pub fn new(lr: f32) -> Self {
        Self { lr, alpha: 0.99, eps: 1e-8, square_avg: Vec::new() }
    }

    pub fn step(&mut self, store: &mut ParamStore<f32>, grads: &[Vec<f32>]) {
        if self.square_avg.is_empty() {
            self.square_avg = grads.iter().map(|g| vec![0.0; g.len()]).collect();
        }
        for ((p, g), sq) in store.values_mut().zip(grads).zip(&mut self.square_avg) {
            for ((w, &d), s) in p.iter_mut().zip(g).zip(sq.iter_mut()) {
                *s = self.alpha * *s + (1.0 - self.alpha) * d * d;
                *w -= self.lr * d / (s.sqrt() + self.eps);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_step_is_about_lr_over_sqrt_one_minus_alpha() {
        let mut store = ParamStore::new();
        store.add("w", vec![1.0f32, -1.0]);
        let mut opt = Rmsprop::new(1e-3);
        opt.step(&mut store, &[vec![2.0, -0.5]]);
        let expect = 1e-3 / 0.01f32.sqrt();
        let w = store.by_name("w").unwrap();
        assert!((w[0] - (1.0 - expect)).abs() < 1e-6);
        assert!((w[1] - (-1.0 + expect)).abs() < 1e-6);
    }
}
