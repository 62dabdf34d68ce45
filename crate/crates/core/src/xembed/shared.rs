use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::numkit::{derive_seed, Rng};
use crate::types::{Dictionary, EmbeddingSpace, ParallelCorpus};
use crate::xembed::{
    build_inverted_index, embed_invert, embed_random, embed_ratio, fit_translation_matrix, map_to_shared_space,
    train_bicvm, train_sgns, BicvmConfig, InvertConfig, SgnsConfig,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    /// Monolingual spaces joined by a least-squares translation matrix.
    Map,
    Random,
    Ratio,
    Invert,
    Bicvm,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Map,
        Method::Random,
        Method::Ratio,
        Method::Invert,
        Method::Bicvm,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Map => "map",
            Method::Random => "random",
            Method::Ratio => "ratio",
            Method::Invert => "invert",
            Method::Bicvm => "bicvm",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown embedding method {s:?}")))
    }
}

/// Settings for every method; only the ones the chosen method uses matter.
#[derive(Clone, Debug, Default)]
pub struct EmbedConfig {
    pub sgns: SgnsConfig,
    pub invert: InvertConfig,
    pub bicvm: BicvmConfig,
    /// Required by [`Method::Map`]; entries are `(source, target)` words.
    pub dictionary: Option<Dictionary>,
}

/// Builds a prefixed shared space for both languages of `parallel`.
///
/// Per-component seeds are derived from `seed`; seeds inside `cfg` are
/// ignored. For [`Method::Map`] each side of the corpus trains its own
/// monolingual SGNS space before the two are joined.
pub fn build_shared_space(
    method: Method,
    parallel: &ParallelCorpus,
    cfg: &EmbedConfig,
    seed: u64,
) -> Result<EmbeddingSpace> {
    if parallel.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let sgns = |component: &str| SgnsConfig {
        seed: derive_seed(seed, component),
        ..cfg.sgns.clone()
    };
    match method {
        Method::Random => {
            let mut rng = Rng::new(seed).derive("merge.random");
            Ok(embed_random(parallel, &sgns("sgns.random"), &mut rng)?.into_space())
        }
        Method::Ratio => Ok(embed_ratio(parallel, &sgns("sgns.ratio"))?.into_space()),
        Method::Invert => {
            let index = build_inverted_index(std::slice::from_ref(parallel), cfg.invert.weighting)?;
            let invert = InvertConfig {
                svd: crate::numkit::SvdConfig {
                    seed: derive_seed(seed, "invert.svd"),
                    ..cfg.invert.svd
                },
                ..cfg.invert.clone()
            };
            embed_invert(&index, &invert)
        }
        Method::Bicvm => {
            let bicvm = BicvmConfig {
                seed: derive_seed(seed, "bicvm"),
                ..cfg.bicvm.clone()
            };
            Ok(train_bicvm(parallel, &bicvm)?.into_space())
        }
        Method::Map => {
            let dict = cfg
                .dictionary
                .as_ref()
                .ok_or_else(|| Error::Config("the map method needs a dictionary".into()))?;
            let src: Vec<Vec<String>> = parallel.pairs().iter().map(|p| p.src_tokens.clone()).collect();
            let tgt: Vec<Vec<String>> = parallel.pairs().iter().map(|p| p.tgt_tokens.clone()).collect();
            let src_space = train_sgns(&src, &sgns("sgns.map.src"))?.into_space();
            let tgt_space = train_sgns(&tgt, &sgns("sgns.map.tgt"))?.into_space();
            let fit = fit_translation_matrix(&tgt_space, &src_space, dict, parallel.tgt_lang(), parallel.src_lang())?;
            map_to_shared_space(&src_space, &tgt_space, &fit.map)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::LangTag;

    fn corpus() -> ParallelCorpus {
        let split = |x: &str| x.split(' ').map(String::from).collect::<Vec<_>>();
        let rows = [("a b c", "x y z"), ("b c", "y z"), ("a c", "x z"), ("c a b", "z x y")];
        ParallelCorpus::from_token_pairs(
            rows.iter().map(|(a, b)| (split(a), split(b))),
            LangTag::new("eng").unwrap(),
            LangTag::new("fra").unwrap(),
        )
        .unwrap()
    }

    fn cfg() -> EmbedConfig {
        EmbedConfig {
            sgns: SgnsConfig {
                dim: 3,
                epochs: 1,
                ..SgnsConfig::default()
            },
            invert: InvertConfig {
                rank: 3,
                ..InvertConfig::default()
            },
            bicvm: BicvmConfig {
                dim: 3,
                epochs: 1,
                ..BicvmConfig::default()
            },
            dictionary: Some(
                Dictionary::new([
                    ("a".into(), "x".into()),
                    ("b".into(), "y".into()),
                    ("c".into(), "z".into()),
                ])
                .unwrap(),
            ),
        }
    }

    #[test]
    fn every_method_yields_prefixed_space() {
        let c = corpus();
        for m in Method::ALL {
            let s = build_shared_space(m, &c, &cfg(), 5).unwrap();
            assert_eq!(s.dim(), 3, "{m}");
            for t in ["eng:a", "eng:b", "eng:c", "fra:x", "fra:y", "fra:z"] {
                assert!(s.vocab().contains(t), "{m} {t}");
            }
            let again = build_shared_space(m, &c, &cfg(), 5).unwrap();
            assert_eq!(s, again, "{m}");
            assert_eq!(m.to_string().parse::<Method>().unwrap(), m);
        }
    }

    #[test]
    fn map_requires_dictionary() {
        let c = EmbedConfig {
            dictionary: None,
            ..cfg()
        };
        assert!(matches!(
            build_shared_space(Method::Map, &corpus(), &c, 1),
            Err(Error::Config(_))
        ));
        assert!("fasttext".parse::<Method>().is_err());
    }
}
