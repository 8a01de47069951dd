//! Flow domains, node-label domains and their built-in instances.

pub mod domain;
pub mod ext;
pub mod keyset;
pub mod label;
pub mod laws;
pub mod value;

pub use domain::{make_domain, product_domain, DomainKind, FlowDomain, FlowDomainSpec};
pub use ext::{ExtInt, ExtNat};
pub use keyset::KeySet;
pub use label::{Flat, LabelDomain, LockTag, NodeLabel};
pub use laws::{law_check, standard_samples, LawReport, LawViolation};
pub use value::{FlowValue, LastEdge};
