use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the library can report. Each variant maps to a distinct
/// process exit code (see [`Error::exit_code`]).
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("order guard exceeded: more than {limit} elements")]
    OrderGuardExceeded { limit: usize },
    #[error("domain mismatch: {0}")]
    DomainMismatch(String),
    #[error("unknown element `{0}`")]
    UnknownElement(String),
    #[error("block is not invariant under the group")]
    NotInvariant,
    #[error("not a group: {0}")]
    NotAGroup(String),
    #[error("not an isometry orbit: {0}")]
    NotAComponent(String),
    #[error("invalid space: {0}")]
    InvalidSpace(String),
    #[error("invalid tree: {0}")]
    InvalidTree(String),
    #[error("nodes `{0}` and `{1}` are comparable")]
    Comparable(String, String),
    #[error("node is not in the requested class: {0}")]
    NotInClass(String),
    #[error("level set violates the bounding condition: {0}")]
    ConditionTwoViolated(String),
    #[error("map is not an isometric embedding: {0}")]
    NotIsometric(String),
    #[error("tree is not pruned: {0}")]
    NotPruned(String),
    #[error("invalid level embedding: {0}")]
    InvalidEmbedding(String),
    #[error("comb radii must be strictly decreasing and below {0}")]
    RadiiTooLarge(String),
    #[error("invalid skeleton: {0}")]
    InvalidSkeleton(String),
    #[error("family is not full: {0}")]
    NotFull(String),
    #[error("coordinate group is not transitive: {0}")]
    NotTransitive(String),
    #[error("brute-force oracle refuses {size} elements (limit {limit})")]
    TooLarge { size: usize, limit: usize },
    #[error("invalid projection system: {0}")]
    InvalidSystem(String),
    #[error("up-set of {size} elements exceeds the search guard {limit}")]
    UpSetTooLarge { size: usize, limit: usize },
    #[error("skeleton carries no level map")]
    MissingLevels,
    #[error("depth {k} too small, need at least {need}")]
    DepthTooSmall { k: usize, need: usize },
    #[error("chain is not proper: {0}")]
    NotProper(String),
    #[error("class mismatch: {0}")]
    ClassMismatch(String),
    #[error("map is not an order isomorphism: {0}")]
    NotOrderIso(String),
    #[error("map does not respect blocks: {0}")]
    BlockMismatch(String),
    #[error("skeleton is not linear")]
    NotLinear,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("schema error: {0}")]
    Schema(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    /// Process exit code; 0 is success and 1 is reserved for a failed validation.
    pub fn exit_code(&self) -> i32 {
        use Error::*;
        match self {
            OrderGuardExceeded { .. } => 10,
            DomainMismatch(_) => 11,
            UnknownElement(_) => 12,
            NotInvariant => 13,
            NotAGroup(_) => 14,
            NotAComponent(_) => 15,
            InvalidSpace(_) => 16,
            InvalidTree(_) => 17,
            Comparable(..) => 18,
            NotInClass(_) => 19,
            ConditionTwoViolated(_) => 20,
            NotIsometric(_) => 21,
            NotPruned(_) => 22,
            InvalidEmbedding(_) => 23,
            RadiiTooLarge(_) => 24,
            InvalidSkeleton(_) => 25,
            NotFull(_) => 26,
            NotTransitive(_) => 27,
            TooLarge { .. } => 28,
            InvalidSystem(_) => 29,
            UpSetTooLarge { .. } => 30,
            MissingLevels => 31,
            DepthTooSmall { .. } => 32,
            NotProper(_) => 33,
            ClassMismatch(_) => 34,
            NotOrderIso(_) => 35,
            BlockMismatch(_) => 36,
            NotLinear => 37,
            Parse(_) => 40,
            Schema(_) => 41,
            Io(_) => 42,
            Invariant(_) => 50,
        }
    }

    /// Short stable name of the error class, used in reports.
    pub fn class(&self) -> &'static str {
        use Error::*;
        match self {
            OrderGuardExceeded { .. } => "OrderGuardExceeded",
            DomainMismatch(_) => "DomainMismatch",
            UnknownElement(_) => "UnknownElement",
            NotInvariant => "NotInvariant",
            NotAGroup(_) => "NotAGroup",
            NotAComponent(_) => "NotAComponent",
            InvalidSpace(_) => "InvalidSpace",
            InvalidTree(_) => "InvalidTree",
            Comparable(..) => "Comparable",
            NotInClass(_) => "NotInClass",
            ConditionTwoViolated(_) => "ConditionTwoViolated",
            NotIsometric(_) => "NotIsometric",
            NotPruned(_) => "NotPruned",
            InvalidEmbedding(_) => "InvalidEmbedding",
            RadiiTooLarge(_) => "RadiiTooLarge",
            InvalidSkeleton(_) => "InvalidSkeleton",
            NotFull(_) => "NotFull",
            NotTransitive(_) => "NotTransitive",
            TooLarge { .. } => "TooLarge",
            InvalidSystem(_) => "InvalidSystem",
            UpSetTooLarge { .. } => "UpSetTooLarge",
            MissingLevels => "MissingLevels",
            DepthTooSmall { .. } => "DepthTooSmall",
            NotProper(_) => "NotProper",
            ClassMismatch(_) => "ClassMismatch",
            NotOrderIso(_) => "NotOrderIso",
            BlockMismatch(_) => "BlockMismatch",
            NotLinear => "NotLinear",
            Parse(_) => "ParseError",
            Schema(_) => "SchemaError",
            Io(_) => "IoError",
            Invariant(_) => "InvariantViolated",
        }
    }
}

pub(crate) fn invariant(ok: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Invariant(msg()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn one_of_each() -> Vec<Error> {
        use Error::*;
        let s = String::new;
        vec![
            OrderGuardExceeded { limit: 0 },
            DomainMismatch(s()),
            UnknownElement(s()),
            NotInvariant,
            NotAGroup(s()),
            NotAComponent(s()),
            InvalidSpace(s()),
            InvalidTree(s()),
            Comparable(s(), s()),
            NotInClass(s()),
            ConditionTwoViolated(s()),
            NotIsometric(s()),
            NotPruned(s()),
            InvalidEmbedding(s()),
            RadiiTooLarge(s()),
            InvalidSkeleton(s()),
            NotFull(s()),
            NotTransitive(s()),
            TooLarge { size: 0, limit: 0 },
            InvalidSystem(s()),
            UpSetTooLarge { size: 0, limit: 0 },
            MissingLevels,
            DepthTooSmall { k: 0, need: 0 },
            NotProper(s()),
            ClassMismatch(s()),
            NotOrderIso(s()),
            BlockMismatch(s()),
            NotLinear,
            Parse(s()),
            Schema(s()),
            Io(s()),
            Invariant(s()),
        ]
    }

    #[test]
    fn exit_codes_and_classes_are_unique() {
        let all = one_of_each();
        let codes: BTreeSet<i32> = all.iter().map(Error::exit_code).collect();
        let classes: BTreeSet<&str> = all.iter().map(Error::class).collect();
        assert_eq!(codes.len(), all.len());
        assert_eq!(classes.len(), all.len());
        // 0, 1 and 3 are taken by verdicts, 2 by usage errors
        assert!(codes.iter().all(|&c| c >= 10));
    }
}
