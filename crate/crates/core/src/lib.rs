//! Finite projective geometry over small fields, the split Cayley hexagon
//! H(q) in PG(6, q), and an auditor for intersection-number axioms on line
//! sets.

pub mod audit;
pub mod error;
pub mod format;
pub mod gf;
pub mod hexagon;
pub mod lineset;
pub mod pg;
pub mod polygon;
pub mod quadric;
pub mod search;
pub mod srg;

pub use audit::{audit, AuditReport, Axiom, AxiomConfig};
pub use error::{Error, Result};
pub use format::{parse_lineset, write_lineset};
pub use gf::{Field, FieldElement, FieldSpec};
pub use lineset::{LineRecord, LineSet};
pub use pg::{Ambient, ProjLine, ProjPoint, Space, Subspace};
pub use polygon::KGon;
pub use quadric::{Section, SectionType};
pub use search::{SearchSpec, SearchResult};
pub use srg::SrgParams;
