//! Linear assignment by the shortest augmenting path method with
//! dual potentials (Hungarian algorithm, O(n^2 m)).

/// Solution of a square assignment problem.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    /// `row_to_col[i]` is the column assigned to row `i`.
    pub row_to_col: Vec<usize>,
    pub cost: f64,
}

/// Minimises `sum_i cost[i][row_to_col[i]]` over permutations.
///
/// `cost` is a row-major `n x n` matrix of finite values.
pub fn solve(n: usize, cost: &[f64]) -> Assignment {
    assert_eq!(cost.len(), n * n, "cost matrix must be n x n");
    solve_rect(n, n, cost)
}

/// Rectangular variant: assigns each of `rows` rows to a distinct column
/// out of `cols >= rows`, minimising the total cost. `cost` is row-major
/// `rows x cols`.
pub fn solve_rect(rows: usize, cols: usize, cost: &[f64]) -> Assignment {
    assert!(rows <= cols, "need at least as many columns as rows");
    assert_eq!(cost.len(), rows * cols, "cost matrix must be rows x cols");
    let nc = cols;
    let mut u = vec![0.0f64; rows];
    let mut v = vec![0.0f64; nc];
    let mut col4row = vec![NONE; rows];
    let mut row4col = vec![NONE; nc];

    // Row reduction keeps v = 0, so free columns stay at zero potential;
    // each row whose cheapest column is still free takes it.
    for i in 0..rows {
        let row = &cost[i * nc..(i + 1) * nc];
        let (mut best, mut arg) = (f64::INFINITY, 0usize);
        for (j, &c) in row.iter().enumerate() {
            if c < best {
                best = c;
                arg = j;
            }
        }
        u[i] = best;
        if row4col[arg] == NONE {
            row4col[arg] = i;
            col4row[i] = arg;
        }
    }

    let mut sp = Paths::new(rows, nc);
    for cur in 0..rows {
        if col4row[cur] != NONE {
            continue;
        }
        let (sink, min_val) = sp.shortest(cost, nc, &u, &v, &row4col, cur);
        u[cur] += min_val;
        for i in 0..rows {
            if sp.sr[i] && i != cur {
                u[i] += min_val - sp.dist[col4row[i]];
            }
        }
        for j in 0..nc {
            if sp.sc[j] {
                v[j] -= min_val - sp.dist[j];
            }
        }
        let mut j = sink;
        loop {
            let i = sp.path[j];
            row4col[j] = i;
            std::mem::swap(&mut col4row[i], &mut j);
            if i == cur {
                break;
            }
        }
    }

    let total = col4row.iter().enumerate().map(|(i, &j)| cost[i * nc + j]).sum();
    Assignment {
        row_to_col: col4row,
        cost: total,
    }
}

const NONE: usize = usize::MAX;

/// Scratch space of the shortest augmenting path search.
struct Paths {
    dist: Vec<f64>,
    path: Vec<usize>,
    sr: Vec<bool>,
    sc: Vec<bool>,
    remaining: Vec<usize>,
}

impl Paths {
    fn new(rows: usize, cols: usize) -> Self {
        Paths {
            dist: vec![0.0; cols],
            path: vec![NONE; cols],
            sr: vec![false; rows],
            sc: vec![false; cols],
            remaining: vec![0; cols],
        }
    }

    /// Dijkstra over reduced costs from row `start` to the nearest free
    /// column; returns that column and its distance.
    fn shortest(&mut self, cost: &[f64], nc: usize, u: &[f64], v: &[f64], row4col: &[usize], start: usize) -> (usize, f64) {
        let mut num_remaining = nc;
        for (k, r) in self.remaining.iter_mut().enumerate() {
            *r = nc - k - 1;
        }
        self.sr.iter_mut().for_each(|b| *b = false);
        self.sc.iter_mut().for_each(|b| *b = false);
        self.dist.iter_mut().for_each(|d| *d = f64::INFINITY);
        let mut min_val = 0.0;
        let mut i = start;
        loop {
            self.sr[i] = true;
            let row = &cost[i * nc..(i + 1) * nc];
            let base = min_val - u[i];
            let mut index = NONE;
            let mut lowest = f64::INFINITY;
            for k in 0..num_remaining {
                let j = self.remaining[k];
                let r = base + row[j] - v[j];
                if r < self.dist[j] {
                    self.path[j] = i;
                    self.dist[j] = r;
                }
                let d = self.dist[j];
                if d < lowest || (d == lowest && row4col[j] == NONE) {
                    lowest = d;
                    index = k;
                }
            }
            min_val = lowest;
            let j = self.remaining[index];
            self.sc[j] = true;
            num_remaining -= 1;
            self.remaining[index] = self.remaining[num_remaining];
            if row4col[j] == NONE {
                return (j, min_val);
            }
            i = row4col[j];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(n: usize, cost: &[f64]) -> f64 {
        fn rec(n: usize, cost: &[f64], row: usize, used: &mut Vec<bool>, acc: f64, best: &mut f64) {
            if row == n {
                *best = best.min(acc);
                return;
            }
            for j in 0..n {
                if !used[j] {
                    used[j] = true;
                    rec(n, cost, row + 1, used, acc + cost[row * n + j], best);
                    used[j] = false;
                }
            }
        }
        let mut best = f64::INFINITY;
        rec(n, cost, 0, &mut vec![false; n], 0.0, &mut best);
        best
    }

    #[test]
    fn small_known_case() {
        let cost = [4.0, 1.0, 3.0, 2.0, 0.0, 5.0, 3.0, 2.0, 2.0];
        let a = solve(3, &cost);
        assert_eq!(a.cost, 5.0);
        let mut cols = a.row_to_col.clone();
        cols.sort();
        assert_eq!(cols, vec![0, 1, 2]);
    }

    #[test]
    fn matches_enumeration_on_pseudo_random_matrices() {
        let mut state = 12345u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for n in 1..=6 {
            for _ in 0..50 {
                let cost: Vec<f64> = (0..n * n).map(|_| next()).collect();
                let a = solve(n, &cost);
                assert!((a.cost - brute(n, &cost)).abs() < 1e-12);
                let b = solve_rect(n, n, &cost);
                assert!((b.cost - brute(n, &cost)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rectangular_matches_padded_square() {
        let mut state = 99u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for rows in 0..=5 {
            for cols in rows..=6 {
                for _ in 0..20 {
                    let cost: Vec<f64> = (0..rows * cols).map(|_| (next() * 4.0).floor()).collect();
                    let mut square = vec![0.0; cols * cols];
                    square[..rows * cols].copy_from_slice(&cost);
                    let a = solve_rect(rows, cols, &cost);
                    assert_eq!(a.cost, brute(cols, &square));
                    let mut seen = a.row_to_col.clone();
                    seen.sort();
                    seen.dedup();
                    assert_eq!(seen.len(), rows);
                }
            }
        }
    }

    #[test]
    fn constant_rows_and_ties() {
        let mut state = 3u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for n in 2..=7usize {
            for _ in 0..100 {
                let real = 1 + (next() * (n - 1) as f64) as usize;
                let cost: Vec<f64> = (0..n * n)
                    .map(|k| if k / n < real { (next() * 3.0).floor().min(2.0) } else { 2.0 })
                    .collect();
                assert_eq!(solve(n, &cost).cost, brute(n, &cost));
            }
        }
    }

    #[test]
    fn empty_problem() {
        assert_eq!(solve(0, &[]).cost, 0.0);
    }
}
