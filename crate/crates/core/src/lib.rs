//! Dataspace actors and facet-structured behavior.

pub mod dataspace;
pub mod drivers;
pub mod expansion;
pub mod facets;
pub mod forms;
pub mod values;
