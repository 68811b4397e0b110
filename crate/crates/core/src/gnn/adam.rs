//! Adam optimizer with the standard moment constants 0.9/0.999 and
//! epsilon 1e-8. Weight decay is applied as an L2 term on the gradient.

use crate::linalg::Mat;

#[derive(Debug, Clone)]
pub struct Adam {
    pub learning_rate: f64,
    pub weight_decay: f64,
    beta1: f64,
    beta2: f64,
    epsilon: f64,
    step_count: u64,
    first_moment: Vec<Mat>,
    second_moment: Vec<Mat>,
}

impl Adam {
    pub fn new(shapes: &[&Mat], learning_rate: f64, weight_decay: f64) -> Self {
        Adam {
            learning_rate,
            weight_decay,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            step_count: 0,
            first_moment: shapes.iter().map(|m| Mat::zeros(m.rows, m.cols)).collect(),
            second_moment: shapes.iter().map(|m| Mat::zeros(m.rows, m.cols)).collect(),
        }
    }

    pub fn step(&mut self, params: &mut [&mut Mat], grads: &[Mat]) {
        assert_eq!(params.len(), grads.len());
        assert_eq!(params.len(), self.first_moment.len());
        self.step_count += 1;
        let t = self.step_count as i32;
        let bias1 = 1.0 - self.beta1.powi(t);
        let bias2 = 1.0 - self.beta2.powi(t);
        for (idx, param) in params.iter_mut().enumerate() {
            let m = &mut self.first_moment[idx];
            let v = &mut self.second_moment[idx];
            for ((p, &g_raw), (m_e, v_e)) in param
                .data
                .iter_mut()
                .zip(&grads[idx].data)
                .zip(m.data.iter_mut().zip(v.data.iter_mut()))
            {
                let g = g_raw + self.weight_decay * *p;
                *m_e = self.beta1 * *m_e + (1.0 - self.beta1) * g;
                *v_e = self.beta2 * *v_e + (1.0 - self.beta2) * g * g;
                let m_hat = *m_e / bias1;
                let v_hat = *v_e / bias2;
                *p -= self.learning_rate * m_hat / (v_hat.sqrt() + self.epsilon);
            }
        }
    }
}
