//! Output formats for generated nets: CPN Tools XML (with a reader for
//! round-trip checks) and Graphviz DOT.

mod dot;
mod layout;
pub mod ml;
mod xml;

pub use dot::emit_dot;
pub use layout::{layout, Layout, SPACING};
pub use xml::{emit_cpn_xml, parse_cpn_xml, CpnXmlError, DocPos, EmitError};

use crate::cpn::ColouredNet;

/// [`emit_cpn_xml`] with the computed [`layout`].
pub fn to_cpn_xml(net: &ColouredNet) -> String {
    emit_cpn_xml(net, &layout(net)).expect("computed layout covers every node")
}
