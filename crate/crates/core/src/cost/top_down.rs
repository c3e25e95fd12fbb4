//! Expected cost of TOP-DOWN on i.i.d. binary data.

use crate::error::{Error, Result};

use super::IidModel;

/// Expected cost when one lattice lookup costs `k`.
///
/// Level `l` holds the combinations with `l` zeros. `p_present(l)` is the
/// chance that at least one of the `n` tuples has a given level-`l`
/// combination; a level's children are explored only when its node is
/// empty. Recursion: `C(m') = k / m'`, `C(0) = k + (1 - p_present(0)) m' C(1)`
/// and `C(l) = (k + (1 - p_present(l)) (m' - l) C(l + 1)) / l` otherwise.
pub fn expected_top_down_cost(model: &IidModel, k: f64) -> Result<f64> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::invalid(format!("lookup cost {k} must be positive")));
    }
    let m = model.m();
    let n = model.n() as f64;
    let p = model.p();
    let present = |l: usize| {
        let zeros: f64 = p[..l].iter().map(|&x| 1.0 - x).product();
        let ones: f64 = p[..m - l].iter().product();
        1.0 - (1.0 - zeros * ones).powf(n)
    };
    let mut c = k / m as f64;
    for l in (0..m).rev() {
        let explore = (1.0 - present(l)) * (m - l) as f64 * c;
        c = if l == 0 {
            k + explore
        } else {
            (k + explore) / l as f64
        };
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn large_n_collapses_to_one_lookup() {
        let model = IidModel::uniform(4, 0.5, 1_000_000).unwrap();
        assert!((expected_top_down_cost(&model, 3.0).unwrap() - 3.0).abs() < 1e-9);
    }

    #[test]
    fn grows_with_query_length() {
        let mut prev = 0.0;
        for m in 8..=20 {
            let model = IidModel::uniform(m, 0.5, 1000).unwrap();
            let c = expected_top_down_cost(&model, 1.0).unwrap();
            assert!(c > prev, "m'={m}: {c} <= {prev}");
            prev = c;
        }
    }

    #[test]
    fn single_attribute_by_hand() {
        // C(1) = k; C(0) = k + (1 - p_present(0)) * C(1).
        let model = IidModel::uniform(1, 0.5, 2).unwrap();
        let miss = 0.25;
        let want = 2.0 + miss * 2.0;
        assert!((expected_top_down_cost(&model, 2.0).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_positive_k() {
        let model = IidModel::uniform(2, 0.5, 10).unwrap();
        assert!(expected_top_down_cost(&model, 0.0).is_err());
    }
}
