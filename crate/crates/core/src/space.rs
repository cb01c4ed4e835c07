//! Model spaces: an ambient sequence class together with a generating
//! seminorm family, a family of bounded sets and declared attributes.

use serde::{Deserialize, Serialize};

use crate::seminorm::{FamilyKind, Seminorm, SeminormFamily};
use crate::weight::Weight;

/// Which sequences belong to the space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SequenceClass {
    /// Every scalar sequence.
    All,
    /// Bounded sequences.
    Bounded,
    /// Sequences tending to zero.
    Null,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceModel {
    pub name: String,
    pub class: SequenceClass,
    pub family: SeminormFamily,
    /// Minkowski functionals of the bounded sets used for `bb` quantities.
    pub bounded_sets: SeminormFamily,
    /// Declared sequential completeness.
    pub complete: bool,
    /// Declared local boundedness.
    pub locally_bounded: bool,
}

impl SpaceModel {
    pub fn coordinatewise(name: &str, class: SequenceClass) -> SpaceModel {
        SpaceModel {
            name: name.to_string(),
            class,
            family: SeminormFamily::coordinates(true),
            bounded_sets: SeminormFamily::bounded_sets(coordinate_boxes()),
            // only the full product space is complete coordinatewise
            complete: class == SequenceClass::All,
            locally_bounded: false,
        }
    }

    /// All sequences with the product topology.
    pub fn all_sequences() -> SpaceModel {
        SpaceModel::coordinatewise("all sequences, coordinatewise", SequenceClass::All)
    }

    /// Bounded sequences with coordinatewise convergence.
    pub fn bounded_coordinatewise() -> SpaceModel {
        SpaceModel::coordinatewise("bounded sequences, coordinatewise", SequenceClass::Bounded)
    }

    /// Null sequences with coordinatewise convergence.
    pub fn null_coordinatewise() -> SpaceModel {
        SpaceModel::coordinatewise("null sequences, coordinatewise", SequenceClass::Null)
    }

    pub fn normed(name: &str, class: SequenceClass) -> SpaceModel {
        SpaceModel {
            name: name.to_string(),
            class,
            family: SeminormFamily::single(Seminorm::sup_norm()),
            bounded_sets: SeminormFamily::bounded_sets(vec![Seminorm::minkowski(Weight::one())]),
            complete: true,
            locally_bounded: true,
        }
    }

    /// Bounded sequences with the sup norm.
    pub fn bounded_normed() -> SpaceModel {
        SpaceModel::normed("bounded sequences, sup norm", SequenceClass::Bounded)
    }

    /// Null sequences with the sup norm.
    pub fn null_normed() -> SpaceModel {
        SpaceModel::normed("null sequences, sup norm", SequenceClass::Null)
    }

    pub fn with_bounded_sets(mut self, sets: Vec<Seminorm>) -> SpaceModel {
        self.bounded_sets = SeminormFamily::bounded_sets(sets);
        self
    }

    pub fn is_coordinatewise(&self) -> bool {
        self.family.is_coordinate_type()
    }

    pub fn is_normed(&self) -> bool {
        matches!(&self.family.kind, FamilyKind::Single { norm } if norm.as_box().is_some())
    }

    /// The single norm of a normed model.
    pub fn norm(&self) -> Option<&Seminorm> {
        match &self.family.kind {
            FamilyKind::Single { norm } => Some(norm),
            _ => None,
        }
    }
}

/// Unit box, the box `|x_k| <= k` and the box `|x_k| <= (2k)^(2k)`.
pub fn coordinate_boxes() -> Vec<Seminorm> {
    vec![
        Seminorm::minkowski(Weight::one()),
        Seminorm::minkowski(Weight::power(1.0, 1.0)),
        Seminorm::minkowski(Weight::self_power(2.0)),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn declared_attributes() {
        assert!(SpaceModel::all_sequences().complete);
        assert!(!SpaceModel::null_coordinatewise().complete);
        assert!(SpaceModel::bounded_normed().is_normed());
        assert!(!SpaceModel::bounded_coordinatewise().is_normed());
        assert!(SpaceModel::bounded_coordinatewise().is_coordinatewise());
        assert_eq!(SpaceModel::null_normed().bounded_sets.enumerate(5).len(), 1);
    }
}
