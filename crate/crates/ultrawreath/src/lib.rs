//! Ultrametric spaces, leveled trees and generalized wreath products, with
//! every group isomorphism between them checked on finite data.

// distance matrices and per-element tables read better indexed
#![allow(clippy::needless_range_loop)]

pub mod cli;
pub mod corpus;
pub mod error;
pub mod functors;
pub mod io;
pub mod ltree;
pub mod permgroup;
pub mod pipelines;
pub mod rational;
mod search;
pub mod ultrametric;
pub mod wreath;

pub use error::{Error, Result};
pub use rational::Q;
