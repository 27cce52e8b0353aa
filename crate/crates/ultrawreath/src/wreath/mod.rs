//! Generalized wreath products over a finite poset skeleton: global domains,
//! local families and projection systems, all reduced to automorphisms of the
//! canonical poset.

mod family;
pub mod fixtures;
mod group;
mod pads;
mod projection;
mod rho;
mod skeleton;
mod treeify;

pub use family::{
    d_delta, domain_from_supports, support_kind, FamilyViolation, LocalFamily, Seq, SupportFlags,
    SupportKind, SupportUniverse,
};
pub use group::{
    brute_wreath_oracle, coordinate_actions_are_permutations, global_wreath_group,
    is_approximately_homogeneous, is_locally_homogeneous, render_global, wreath_group,
    CoordinateGroups, ORACLE_LIMIT,
};
pub use pads::{pad_bottom, pad_top, Padded};
pub use projection::{
    CanonicalPoset, CharacterPartition, ProjViolation, ProjectionSystem, UP_SET_GUARD,
};
pub use rho::{rho, verify_rho, RhoResult};
pub use skeleton::Skeleton;
pub use treeify::{min_depth, poset_as_tree, tree_from_wreath, SideChains, TreeFromWreath};

use crate::error::Result;

/// The four ways a wreath product's domain can be given.
#[derive(Clone, Debug)]
pub enum Bundle {
    /// The global domain of all sequences whose support has the given kind.
    Supports {
        skeleton: Skeleton,
        kind: SupportKind,
    },
    /// An explicit global domain.
    Global {
        skeleton: Skeleton,
        domain: Vec<Vec<usize>>,
    },
    /// Local domains with plain restrictions as projections.
    Local(LocalFamily),
    Projections(ProjectionSystem),
}

impl Bundle {
    pub fn skeleton(&self) -> &Skeleton {
        match self {
            Bundle::Supports { skeleton, .. } | Bundle::Global { skeleton, .. } => skeleton,
            Bundle::Local(f) => f.skeleton(),
            Bundle::Projections(p) => p.skeleton(),
        }
    }

    /// Every form becomes a projection system; global domains pass through
    /// their local restrictions.
    pub fn to_projection_system(&self, guard: usize) -> Result<ProjectionSystem> {
        match self {
            Bundle::Supports { skeleton, kind } => {
                let s = domain_from_supports(skeleton, *kind, guard)?;
                ProjectionSystem::trivial(&LocalFamily::from_global(skeleton, &s)?)
            }
            Bundle::Global { skeleton, domain } => {
                ProjectionSystem::trivial(&LocalFamily::from_global(skeleton, domain)?)
            }
            Bundle::Local(f) => ProjectionSystem::trivial(f),
            Bundle::Projections(p) => Ok(p.clone()),
        }
    }
}
