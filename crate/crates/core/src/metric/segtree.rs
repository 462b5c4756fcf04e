/// Max segment tree over nonnegative values with point updates.
#[derive(Debug, Clone)]
pub(crate) struct MaxTree {
    size: usize,
    nodes: Vec<f64>,
}

impl MaxTree {
    pub(crate) fn new(values: &[f64]) -> Self {
        let size = values.len().next_power_of_two();
        let mut nodes = vec![0.0; 2 * size];
        nodes[size..size + values.len()].copy_from_slice(values);
        for k in (1..size).rev() {
            nodes[k] = nodes[2 * k].max(nodes[2 * k + 1]);
        }
        Self { size, nodes }
    }

    pub(crate) fn set(&mut self, i: usize, v: f64) {
        let mut k = self.size + i;
        self.nodes[k] = v;
        while k > 1 {
            k /= 2;
            self.nodes[k] = self.nodes[2 * k].max(self.nodes[2 * k + 1]);
        }
    }

    pub(crate) fn max(&self) -> f64 {
        self.nodes[1]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tracks_max_under_updates() {
        let mut t = MaxTree::new(&[1.0, 5.0, 2.0]);
        assert_eq!(t.max(), 5.0);
        t.set(1, 0.5);
        assert_eq!(t.max(), 2.0);
        t.set(0, 7.0);
        assert_eq!(t.max(), 7.0);
    }
}
