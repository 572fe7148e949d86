pub mod absorbing;
pub mod catalog;
pub mod constructions;
pub mod divisibility;
pub mod group;
pub mod lazy_set;
pub mod limits;
pub mod relations;
pub mod verdict;

pub use group::{Element, Group};
pub use lazy_set::{LazySet, Window};
pub use verdict::{Status, Verdict};
