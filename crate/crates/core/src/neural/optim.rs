use super::params::{Group, ParamId, ParamStore};

/// Adam over one parameter group; no weight decay.
#[derive(Debug, Clone)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    t: u64,
    ids: Vec<ParamId>,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
}

impl Adam {
    pub fn new(store: &ParamStore, group: Group, lr: f64) -> Self {
        let ids = store.ids_in(group);
        let zeros: Vec<Vec<f64>> = ids.iter().map(|&id| vec![0.0; store.value(id).len()]).collect();
        Adam {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            t: 0,
            ids,
            m: zeros.clone(),
            v: zeros,
        }
    }

    pub fn steps(&self) -> u64 {
        self.t
    }

    pub fn step(&mut self, store: &mut ParamStore) {
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t as i32);
        let bc2 = 1.0 - self.beta2.powi(self.t as i32);
        for (slot, &id) in self.ids.iter().enumerate() {
            let grad = store.grad(id).data().to_vec();
            let (m, v) = (&mut self.m[slot], &mut self.v[slot]);
            let value = store.value_mut(id).data_mut();
            for i in 0..grad.len() {
                m[i] = self.beta1 * m[i] + (1.0 - self.beta1) * grad[i];
                v[i] = self.beta2 * v[i] + (1.0 - self.beta2) * grad[i] * grad[i];
                let mh = m[i] / bc1;
                let vh = v[i] / bc2;
                value[i] -= self.lr * mh / (vh.sqrt() + self.eps);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neural::Tensor;

    #[test]
    fn first_step_moves_by_lr() {
        let mut store = ParamStore::new();
        let id = store.add("x", Group::Downstream, Tensor::matrix(1, 2, vec![1.0, 1.0]));
        store.accumulate(id, &Tensor::matrix(1, 2, vec![3.0, -0.5]));
        let mut adam = Adam::new(&store, Group::Downstream, 0.1);
        adam.step(&mut store);
        let v = store.value(id).data();
        assert!((v[0] - 0.9).abs() < 1e-6);
        assert!((v[1] - 1.1).abs() < 1e-6);
    }
}
