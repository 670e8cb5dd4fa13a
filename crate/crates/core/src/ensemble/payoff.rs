use nalgebra::DMatrix;

use super::graph::TaskGraph;
use crate::error::{Error, Result};

/// Signed collaboration rates `k_ij`.
///
/// A positive entry means an encounter between a task-`i` and a task-`j`
/// robot turns the task-`j` robot into a task-`i` robot; a negative entry
/// means the task-`i` robot switches to task `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct PayoffMatrix {
    entries: DMatrix<f64>,
    graph: TaskGraph,
}

/// Rates of the three-task Lotka–Volterra payoff.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Example1Rates {
    pub k10: f64,
    pub k12: f64,
    pub k20: f64,
    pub k21: f64,
}

impl Example1Rates {
    pub fn new(k10: f64, k12: f64, k20: f64, k21: f64) -> Self {
        Self { k10, k12, k20, k21 }
    }
}

impl PayoffMatrix {
    /// Validates `entries` against `graph`: square, matching dimension,
    /// zero diagonal, finite, and nonzero only on graph edges.
    pub fn new(graph: TaskGraph, entries: DMatrix<f64>) -> Result<Self> {
        let m = graph.task_count();
        if entries.nrows() != entries.ncols() {
            return Err(Error::Parameter(format!(
                "payoff matrix must be square, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        if entries.nrows() != m {
            return Err(Error::Dimension { expected: m, got: entries.nrows() });
        }
        for i in 0..m {
            for j in 0..m {
                let k = entries[(i, j)];
                if !k.is_finite() {
                    return Err(Error::Parameter(format!("k[{i}][{j}] is not finite")));
                }
                if i == j && k != 0.0 {
                    return Err(Error::Parameter(format!("diagonal entry k[{i}][{i}] = {k} must be zero")));
                }
                if i != j && k != 0.0 && !graph.has_edge(i, j) {
                    return Err(Error::Parameter(format!(
                        "k[{i}][{j}] = {k} but tasks {i} and {j} share no edge"
                    )));
                }
            }
        }
        Ok(Self { entries, graph })
    }

    /// Builds a matrix from rows, taking the task graph to be the support of
    /// the nonzero entries.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let entries = square_from_rows(rows)?;
        let graph = support_graph(&entries)?;
        Self::new(graph, entries)
    }

    /// Lotka–Volterra payoff `[[0,0,0],[k10,0,-k12],[-k20,k21,0]]`.
    pub fn example1(rates: Example1Rates) -> Result<Self> {
        let Example1Rates { k10, k12, k20, k21 } = rates;
        for (name, k) in [("k10", k10), ("k12", k12), ("k20", k20), ("k21", k21)] {
            if !(k > 0.0 && k.is_finite()) {
                return Err(Error::Parameter(format!("{name} must be a positive rate, got {k}")));
            }
        }
        let entries = DMatrix::from_row_slice(3, 3, &[0.0, 0.0, 0.0, k10, 0.0, -k12, -k20, k21, 0.0]);
        let graph = TaskGraph::complete(3)?;
        Self::new(graph, entries)
    }

    /// Four-task cyclic payoff: row `i` has `1` at `i+1` and `-mu` at `i+2`
    /// (indices mod 4).
    pub fn example2(mu: f64) -> Self {
        Self::example2_scaled(1.0, mu).expect("unit-rate cyclic payoff is always valid")
    }

    /// Cyclic payoff with `rate` in place of the unit entries and `-mu` on the
    /// second off-diagonal, as used by count-scale stochastic runs.
    pub fn example2_scaled(rate: f64, mu: f64) -> Result<Self> {
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(Error::Parameter(format!("cyclic rate must be positive, got {rate}")));
        }
        if !mu.is_finite() {
            return Err(Error::Parameter(format!("mu must be finite, got {mu}")));
        }
        let mut entries = DMatrix::zeros(4, 4);
        for i in 0..4 {
            entries[(i, (i + 1) % 4)] = rate;
            entries[(i, (i + 2) % 4)] = -mu;
        }
        Self::new(TaskGraph::complete(4)?, entries)
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn graph(&self) -> &TaskGraph {
        &self.graph
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.entries.row_iter().map(|r| r.iter().copied().collect()).collect()
    }

    /// Every rate multiplied by `factor` (same graph).
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.graph.clone(), &self.entries * factor)
    }

    /// Nonzero entries as `(i, j, k_ij)` in row-major order.
    pub fn nonzero(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let m = self.dim();
        (0..m).flat_map(move |i| (0..m).filter_map(move |j| {
            let k = self.entries[(i, j)];
            (k != 0.0).then_some((i, j, k))
        }))
    }
}

/// Nonnegative feedback gains `alpha_ij`, zero on the diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct FeedbackGains {
    alpha: DMatrix<f64>,
}

impl FeedbackGains {
    pub fn new(alpha: DMatrix<f64>) -> Result<Self> {
        if alpha.nrows() != alpha.ncols() || alpha.nrows() < 2 {
            return Err(Error::Parameter(format!(
                "gain matrix must be square with at least 2 tasks, got {}x{}",
                alpha.nrows(),
                alpha.ncols()
            )));
        }
        let m = alpha.nrows();
        for i in 0..m {
            for j in 0..m {
                let a = alpha[(i, j)];
                if !(a >= 0.0 && a.is_finite()) {
                    return Err(Error::Parameter(format!(
                        "alpha[{i}][{j}] = {a} must be a finite nonnegative gain"
                    )));
                }
                if i == j && a != 0.0 {
                    return Err(Error::Parameter(format!("diagonal gain alpha[{i}][{i}] must be zero")));
                }
            }
        }
        Ok(Self { alpha })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(square_from_rows(rows)?)
    }

    /// Gains on the four channels of the three-task payoff.
    pub fn example1(a10: f64, a12: f64, a20: f64, a21: f64) -> Result<Self> {
        Self::new(DMatrix::from_row_slice(3, 3, &[0.0, 0.0, 0.0, a10, 0.0, a12, a20, a21, 0.0]))
    }

    /// Equal gain on the four cyclic channels `(i, i+1 mod 4)`.
    pub fn example2(alpha: f64) -> Result<Self> {
        let mut m = DMatrix::zeros(4, 4);
        for i in 0..4 {
            m[(i, (i + 1) % 4)] = alpha;
        }
        Self::new(m)
    }

    /// Same gain on every off-diagonal entry.
    pub fn uniform(m: usize, alpha: f64) -> Result<Self> {
        let mut g = DMatrix::from_element(m, m, alpha);
        g.fill_diagonal(0.0);
        Self::new(g)
    }

    pub fn dim(&self) -> usize {
        self.alpha.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.alpha[(i, j)]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.alpha
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.alpha.row_iter().map(|r| r.iter().copied().collect()).collect()
    }

    /// Nonzero gains as `(i, j, alpha_ij)` in row-major order.
    pub fn nonzero(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let m = self.dim();
        (0..m).flat_map(move |i| (0..m).filter_map(move |j| {
            let a = self.alpha[(i, j)];
            (a != 0.0).then_some((i, j, a))
        }))
    }

    /// True when every nonzero gain sits on an edge of the payoff's graph.
    pub fn fits(&self, payoff: &PayoffMatrix) -> bool {
        self.dim() == payoff.dim() && self.nonzero().all(|(i, j, _)| payoff.graph().has_edge(i, j))
    }
}

fn square_from_rows(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let m = rows.len();
    if m == 0 {
        return Err(Error::Parameter("matrix has no rows".into()));
    }
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != m) {
        return Err(Error::Parameter(format!("row {i} has {} entries, expected {m}", r.len())));
    }
    Ok(DMatrix::from_fn(m, m, |i, j| rows[i][j]))
}

fn support_graph(entries: &DMatrix<f64>) -> Result<TaskGraph> {
    let m = entries.nrows();
    let edges: Vec<_> = (0..m)
        .flat_map(|i| (0..m).map(move |j| (i, j)))
        .filter(|&(i, j)| i != j && entries[(i, j)] != 0.0)
        .collect();
    TaskGraph::new(m, &edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example1_layout() {
        let k = PayoffMatrix::example1(Example1Rates::new(2.0, 0.2, 1.5, 0.4)).unwrap();
        assert_eq!(k.rows(), vec![vec![0.0, 0.0, 0.0], vec![2.0, 0.0, -0.2], vec![-1.5, 0.4, 0.0]]);
        let unit = PayoffMatrix::example1(Example1Rates::new(1.0, 1.0, 1.0, 1.0)).unwrap();
        assert_eq!(unit.rows(), vec![vec![0.0, 0.0, 0.0], vec![1.0, 0.0, -1.0], vec![-1.0, 1.0, 0.0]]);
        let small = PayoffMatrix::example1(Example1Rates::new(0.004, 0.0004, 0.003, 0.0008)).unwrap();
        assert_eq!(small.get(1, 0), 0.004);
        assert_eq!(small.get(1, 2), -0.0004);
        assert_eq!(small.get(2, 0), -0.003);
        assert_eq!(small.get(2, 1), 0.0008);
    }

    #[test]
    fn example1_rejects_nonpositive_rates() {
        assert!(PayoffMatrix::example1(Example1Rates::new(0.0, 0.2, 1.5, 0.4)).is_err());
        assert!(PayoffMatrix::example1(Example1Rates::new(2.0, -0.2, 1.5, 0.4)).is_err());
    }

    #[test]
    fn example2_rows() {
        let k = PayoffMatrix::example2(0.01);
        assert_eq!(k.rows()[0], vec![0.0, 1.0, -0.01, 0.0]);
        let k = PayoffMatrix::example2(0.05);
        assert_eq!(k.rows()[2], vec![-0.05, 0.0, 0.0, 1.0]);
        let k = PayoffMatrix::example2(0.0);
        assert!(k.matrix().iter().all(|&v| v == 0.0 || v == 1.0));
    }

    #[test]
    fn rates_off_the_graph_are_rejected() {
        let g = TaskGraph::new(3, &[(0, 1), (1, 2)]).unwrap();
        let mut e = DMatrix::zeros(3, 3);
        e[(0, 2)] = 1.0;
        assert!(PayoffMatrix::new(g.clone(), e).is_err());
        let mut e = DMatrix::zeros(3, 3);
        e[(1, 1)] = 1.0;
        assert!(PayoffMatrix::new(g, e).is_err());
    }

    #[test]
    fn gains_validation() {
        assert!(FeedbackGains::example1(0.03, 0.003, 0.0225, 0.006).is_ok());
        assert!(FeedbackGains::example1(-1.0, 0.0, 0.0, 0.0).is_err());
        assert!(FeedbackGains::from_rows(&[vec![1.0, 0.0], vec![0.0, 0.0]]).is_err());
        let g = FeedbackGains::example2(0.5).unwrap();
        assert_eq!(g.nonzero().count(), 4);
        assert!(g.fits(&PayoffMatrix::example2(0.05)));
    }
}
