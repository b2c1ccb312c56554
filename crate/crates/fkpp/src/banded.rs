/// LU factorisation (no pivoting) of a matrix with two sub- and two
/// super-diagonals. Row `i` stores columns `i − 2 ..= i + 2`.
#[derive(Debug, Clone)]
pub(crate) struct Banded5 {
    rows: Vec<[f64; 5]>,
}

impl Banded5 {
    pub(crate) fn factor(mut rows: Vec<[f64; 5]>) -> Self {
        let n = rows.len();
        for p in 0..n {
            let piv = rows[p][2];
            for r in p + 1..(p + 3).min(n) {
                let k = 2 + p - r;
                let m = rows[r][k] / piv;
                rows[r][k] = m;
                for j in p + 1..(p + 3).min(n) {
                    rows[r][2 + j - r] -= m * rows[p][2 + j - p];
                }
            }
        }
        Banded5 { rows }
    }

    pub(crate) fn solve(&self, b: &mut [f64]) {
        let n = self.rows.len();
        for r in 1..n {
            let mut s = b[r];
            for p in r.saturating_sub(2)..r {
                s -= self.rows[r][2 + p - r] * b[p];
            }
            b[r] = s;
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            for j in i + 1..(i + 3).min(n) {
                s -= self.rows[i][2 + j - i] * b[j];
            }
            b[i] = s / self.rows[i][2];
        }
    }
}
