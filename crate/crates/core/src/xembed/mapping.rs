use crate::error::{Error, Result};
use crate::numkit::{solve_least_squares, Matrix};
use crate::types::{Dictionary, EmbeddingSpace, LangTag, LinearMap};

/// Result of [`fit_translation_matrix`].
#[derive(Clone, Debug)]
pub struct TranslationFit {
    pub map: LinearMap,
    /// Dictionary entries with both words in vocabulary.
    pub usable_pairs: usize,
    /// Least-squares design was rank deficient; the ridge term was used.
    pub ridge: bool,
}

/// Least-squares map from the target-language space into the source
/// (English) space using the dictionary pairs that are in both vocabularies.
///
/// Dictionary entries are `(source word, target word)`.
pub fn fit_translation_matrix(
    tgt_space: &EmbeddingSpace,
    src_space: &EmbeddingSpace,
    dict: &Dictionary,
    tgt_lang: &LangTag,
    src_lang: &LangTag,
) -> Result<TranslationFit> {
    let mut x = Vec::new();
    let mut z = Vec::new();
    let mut usable = 0;
    for (src_word, tgt_word) in dict.entries() {
        if let (Some(t), Some(s)) = (tgt_space.lookup(tgt_word), src_space.lookup(src_word)) {
            x.extend_from_slice(t);
            z.extend_from_slice(s);
            usable += 1;
        }
    }
    if usable == 0 {
        return Err(Error::NoUsablePairs);
    }
    let x = Matrix::from_vec(usable, tgt_space.dim(), x)?;
    let z = Matrix::from_vec(usable, src_space.dim(), z)?;
    let ls = solve_least_squares(&x, &z)?;
    if ls.ridge {
        log::warn!(
            "translation matrix: design rank {} < {}; ridge lambda {:e} applied",
            ls.rank,
            tgt_space.dim(),
            ls.lambda
        );
    }
    Ok(TranslationFit {
        map: LinearMap::new(ls.solution, tgt_lang.clone(), src_lang.clone())?,
        usable_pairs: usable,
        ridge: ls.ridge,
    })
}

/// Replaces every vector `v` by `v · W`. Vocabulary is unchanged.
pub fn apply_map(map: &LinearMap, space: &EmbeddingSpace) -> Result<EmbeddingSpace> {
    if space.dim() != map.input_dim() {
        return Err(Error::DimMismatch {
            expected: map.input_dim(),
            found: space.dim(),
        });
    }
    let mapped = space.matrix().matmul(&map.matrix)?;
    EmbeddingSpace::new(space.vocab().clone(), mapped)
}

/// Shared space holding the source vectors and the mapped target vectors,
/// each under its language prefix.
pub fn map_to_shared_space(
    src_space: &EmbeddingSpace,
    tgt_space: &EmbeddingSpace,
    map: &LinearMap,
) -> Result<EmbeddingSpace> {
    let mapped = apply_map(map, tgt_space)?;
    let src = src_space.prefixed(&map.to_lang)?;
    let tgt = mapped.prefixed(&map.from_lang)?;
    EmbeddingSpace::concat(&[&src, &tgt])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::Vocabulary;
    use crate::xembed::precision_at_1;

    fn lang(s: &str) -> LangTag {
        LangTag::new(s).unwrap()
    }

    fn space(prefix: &str, m: Matrix) -> EmbeddingSpace {
        let vocab = Vocabulary::from_tokens((0..m.rows()).map(|i| format!("{prefix}{i}"))).unwrap();
        EmbeddingSpace::new(vocab, m).unwrap()
    }

    #[test]
    fn identical_spaces_give_identity() {
        let m = Matrix::from_rows(&[
            vec![1.0, 0.5, 0.0],
            vec![0.0, 2.0, 1.0],
            vec![1.0, 0.0, 3.0],
            vec![0.5, 0.5, 0.5],
        ])
        .unwrap();
        let s = space("w", m);
        let dict = Dictionary::new((0..4).map(|i| (format!("w{i}"), format!("w{i}")))).unwrap();
        let fit = fit_translation_matrix(&s, &s, &dict, &lang("fra"), &lang("eng")).unwrap();
        assert!(!fit.ridge);
        assert_eq!(fit.usable_pairs, 4);
        assert!(fit.map.matrix.sub(&Matrix::identity(3)).unwrap().max_abs() < 1e-8);
    }

    #[test]
    fn small_dictionary_triggers_ridge() {
        let d = 300;
        let src = space(
            "e",
            Matrix::from_fn(10, d, |i, j| ((i * 13 + j * 7) % 17) as f64 / 17.0),
        );
        let tgt = space("f", Matrix::from_fn(10, d, |i, j| ((i * 5 + j * 3) % 11) as f64 / 11.0));
        let dict = Dictionary::new((0..5).map(|i| (format!("e{i}"), format!("f{i}")))).unwrap();
        let fit = fit_translation_matrix(&tgt, &src, &dict, &lang("fra"), &lang("eng")).unwrap();
        assert!(fit.ridge);
        assert_eq!(fit.usable_pairs, 5);
        assert!(fit.map.matrix.is_finite());
    }

    #[test]
    fn all_oov_dictionary_fails() {
        let s = space("w", Matrix::identity(2));
        let dict = Dictionary::new(vec![("nope".to_string(), "w0".to_string())]).unwrap();
        assert!(matches!(
            fit_translation_matrix(&s, &s, &dict, &lang("fra"), &lang("eng")),
            Err(Error::NoUsablePairs)
        ));
    }

    #[test]
    fn apply_identity_and_scaled_maps() {
        let s = space(
            "w",
            Matrix::from_rows(&[vec![1.0, 2.0], vec![-1.0, 0.5], vec![3.0, 3.0]]).unwrap(),
        );
        let id = LinearMap::new(Matrix::identity(2), lang("fra"), lang("eng")).unwrap();
        assert_eq!(apply_map(&id, &s).unwrap(), s);

        let two = LinearMap::new(Matrix::identity(2).scaled(2.0), lang("fra"), lang("eng")).unwrap();
        let doubled = apply_map(&two, &s).unwrap();
        assert_eq!(doubled.matrix(), &s.matrix().scaled(2.0));
        let pairs: Vec<(String, String)> = (0..3).map(|i| (format!("w{i}"), format!("w{i}"))).collect();
        let p1 = precision_at_1(&s, &s, &pairs).unwrap();
        let p2 = precision_at_1(&doubled, &s, &pairs).unwrap();
        assert_eq!(p1, p2);
    }

    #[test]
    fn apply_rejects_wrong_width() {
        let s = space("w", Matrix::identity(3));
        let m = LinearMap::new(Matrix::identity(2), lang("fra"), lang("eng")).unwrap();
        assert!(matches!(
            apply_map(&m, &s),
            Err(Error::DimMismatch { expected: 2, found: 3 })
        ));
    }

    #[test]
    fn shared_space_is_prefixed_union() {
        let e = space("w", Matrix::identity(2));
        let f = space("w", Matrix::identity(2));
        let m = LinearMap::new(Matrix::identity(2), lang("fra"), lang("eng")).unwrap();
        let shared = map_to_shared_space(&e, &f, &m).unwrap();
        assert_eq!(shared.vocab().tokens(), &["eng:w0", "eng:w1", "fra:w0", "fra:w1"]);
    }
}
