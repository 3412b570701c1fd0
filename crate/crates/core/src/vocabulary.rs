//! Named coalitions used as intermediate concepts.

use indexmap::IndexMap;

use crate::error::{Error, Result};
use crate::feature_space::FeatureSpace;
use crate::minmax::Coalition;

/// Concept name → coalition. Insertion order is kept for display.
/// Coalitions may overlap.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Vocabulary {
    concepts: IndexMap<String, Coalition>,
}

impl Vocabulary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, name: impl Into<String>, coalition: Coalition) -> Result<()> {
        let name = name.into();
        if self.concepts.contains_key(&name) {
            return Err(Error::InvalidConfig(format!("duplicate concept '{name}'")));
        }
        self.concepts.insert(name, coalition);
        Ok(())
    }

    /// Build from concept → feature names.
    pub fn from_feature_names(
        map: &IndexMap<String, Vec<String>>,
        space: &FeatureSpace,
    ) -> Result<Self> {
        let mut voc = Vocabulary::new();
        for (name, features) in map {
            let idx = features
                .iter()
                .map(|f| {
                    space
                        .index_of(f)
                        .ok_or_else(|| Error::UnknownFeature(format!("{f} (in concept '{name}')")))
                })
                .collect::<Result<Vec<_>>>()?;
            let coalition = Coalition::new(idx, space).map_err(|e| {
                Error::InvalidConfig(format!("concept '{name}': {e}"))
            })?;
            voc.insert(name.clone(), coalition)?;
        }
        Ok(voc)
    }

    /// Parse the JSON file format: an object of concept name → array of
    /// feature names. Integer column indices are accepted too.
    pub fn from_json_str(text: &str, space: &FeatureSpace) -> Result<Self> {
        #[derive(serde::Deserialize)]
        #[serde(untagged)]
        enum FeatureRef {
            Name(String),
            Index(usize),
        }
        let raw: IndexMap<String, Vec<FeatureRef>> = serde_json::from_str(text)?;
        let mut map = IndexMap::new();
        for (name, refs) in raw {
            let features = refs
                .into_iter()
                .map(|r| match r {
                    FeatureRef::Name(n) => Ok(n),
                    FeatureRef::Index(i) if i < space.len() => Ok(space.feature(i).name.clone()),
                    FeatureRef::Index(i) => Err(Error::UnknownFeature(format!(
                        "index {i} (in concept '{name}')"
                    ))),
                })
                .collect::<Result<Vec<_>>>()?;
            map.insert(name, features);
        }
        Vocabulary::from_feature_names(&map, space)
    }

    pub fn to_feature_names(&self, space: &FeatureSpace) -> IndexMap<String, Vec<String>> {
        self.concepts
            .iter()
            .map(|(name, c)| {
                (
                    name.clone(),
                    c.indices()
                        .iter()
                        .map(|&i| space.feature(i).name.clone())
                        .collect(),
                )
            })
            .collect()
    }

    pub fn get(&self, name: &str) -> Result<&Coalition> {
        self.concepts.get(name).ok_or_else(|| Error::UnknownConcept {
            name: name.to_string(),
            available: self.names().map(str::to_string).collect(),
        })
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.concepts.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.concepts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.concepts.is_empty()
    }

    /// `(label, coalition)` pairs in insertion order.
    pub fn coalitions(&self) -> Vec<(String, Coalition)> {
        self.concepts
            .iter()
            .map(|(n, c)| (n.clone(), c.clone()))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::feature_space::FeatureSpec;

    fn space() -> FeatureSpace {
        FeatureSpace::new(
            ["a", "b", "c"]
                .iter()
                .map(|n| FeatureSpec::numeric(*n, 0.0, 1.0).unwrap())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn parses_name_based_json_in_order() {
        let s = space();
        let voc = Vocabulary::from_json_str(r#"{"Zeta":["c","a"],"Alpha":["b"]}"#, &s).unwrap();
        assert_eq!(voc.names().collect::<Vec<_>>(), vec!["Zeta", "Alpha"]);
        assert_eq!(voc.get("Zeta").unwrap().indices(), &[0, 2]);
        assert_eq!(voc.to_feature_names(&s)["Zeta"], vec!["a", "c"]);
    }

    #[test]
    fn rejects_bad_concepts() {
        let s = space();
        assert!(Vocabulary::from_json_str(r#"{"X":["nope"]}"#, &s).is_err());
        assert!(Vocabulary::from_json_str(r#"{"X":[]}"#, &s).is_err());
        let voc = Vocabulary::from_json_str(r#"{"X":["a"]}"#, &s).unwrap();
        match voc.get("Nope") {
            Err(Error::UnknownConcept { available, .. }) => assert_eq!(available, vec!["X"]),
            other => panic!("{other:?}"),
        }
        let mut voc = Vocabulary::new();
        voc.insert("X", Coalition::single(0, &s).unwrap()).unwrap();
        assert!(voc.insert("X", Coalition::single(1, &s).unwrap()).is_err());
    }

    #[test]
    fn accepts_column_indices() {
        let s = space();
        let by_name = Vocabulary::from_json_str(r#"{"ab":["a","b"]}"#, &s).unwrap();
        let by_index = Vocabulary::from_json_str(r#"{"ab":[0,1]}"#, &s).unwrap();
        assert_eq!(by_name, by_index);
        assert!(Vocabulary::from_json_str(r#"{"X":[7]}"#, &s).is_err());
    }
}
