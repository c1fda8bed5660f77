//! Dense boolean relations on `0..n`.

/// Warshall's algorithm, in place.
pub fn close_transitively(m: &mut [Vec<bool>]) {
    let n = m.len();
    for k in 0..n {
        for i in 0..n {
            if m[i][k] {
                for j in 0..n {
                    if m[k][j] {
                        m[i][j] = true;
                    }
                }
            }
        }
    }
}

pub fn is_reflexive(m: &[Vec<bool>]) -> bool {
    (0..m.len()).all(|i| m[i][i])
}

pub fn is_transitive(m: &[Vec<bool>]) -> bool {
    let n = m.len();
    (0..n).all(|i| (0..n).all(|k| !m[i][k] || (0..n).all(|j| !m[k][j] || m[i][j])))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chain_closes() {
        let mut m = vec![vec![false; 3]; 3];
        m[0][1] = true;
        m[1][2] = true;
        close_transitively(&mut m);
        assert!(m[0][2]);
        assert!(!m[2][0]);
        assert!(is_transitive(&m));
    }
}
