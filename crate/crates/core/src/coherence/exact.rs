//! γ and Γ in exact rational arithmetic over dense inputs, for small
//! fixtures where floating-point rounding must be ruled out.

use num_rational::Ratio;
use num_traits::Zero;

use super::CoherenceError;

pub type Rational = Ratio<i64>;

/// γ[f][t] = Σ_t′ B[t][t′]·M[f][t′] with 0/1 `m` and rational `b`.
pub fn gamma_rational(m: &[Vec<u8>], b: &[Vec<Rational>]) -> Result<Vec<Vec<Rational>>, CoherenceError> {
    let t = b.len();
    if b.iter().any(|row| row.len() != t) || m.iter().any(|row| row.len() != t) {
        return Err(CoherenceError::DimensionMismatch(
            "rational inputs must be F×T and T×T".into(),
        ));
    }
    Ok(m.iter()
        .map(|row| {
            (0..t)
                .map(|i| {
                    (0..t)
                        .filter(|&j| row[j] != 0)
                        .fold(Rational::zero(), |acc, j| acc + b[i][j])
                })
                .collect()
        })
        .collect())
}

/// Γ_f = Σ_t M[f][t]·γ[f][t] / d_f.
pub fn coherent_diversification_rational(
    m: &[Vec<u8>],
    gamma: &[Vec<Rational>],
) -> Result<Vec<Rational>, CoherenceError> {
    m.iter()
        .zip(gamma)
        .enumerate()
        .map(|(f, (row, g))| {
            let d = row.iter().filter(|&&x| x != 0).count() as i64;
            if d == 0 {
                return Err(CoherenceError::ZeroDiversification(format!("row {f}")));
            }
            let total = row
                .iter()
                .zip(g)
                .filter(|(x, _)| **x != 0)
                .fold(Rational::zero(), |acc, (_, v)| acc + v);
            Ok(total / d)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_related_pair() {
        let m = vec![vec![1, 1]];
        let half = Rational::new(1, 2);
        let one = Rational::from_integer(1);
        let b = vec![vec![one, half], vec![half, one]];
        let g = gamma_rational(&m, &b).unwrap();
        assert_eq!(g[0], vec![Rational::new(3, 2); 2]);
        assert_eq!(coherent_diversification_rational(&m, &g).unwrap(), vec![Rational::new(3, 2)]);
    }

    #[test]
    fn shape_checked() {
        let b = vec![vec![Rational::zero(); 2]; 2];
        assert!(gamma_rational(&[vec![1, 0, 1]], &b).is_err());
        assert!(coherent_diversification_rational(&[vec![0, 0]], &[vec![Rational::zero(); 2]]).is_err());
    }
}
