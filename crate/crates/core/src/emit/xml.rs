//! CPN Tools 4 documents: a single page, one declaration block.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use thiserror::Error;

use super::layout::Layout;
use super::ml::{MlError, Printer, Reader};
use crate::cpn::{
    Arc, ColourDecl, ColourSet, ColouredNet, Orientation, Place, Transition, VarDecl,
};

const TOOL: &str = r#"tool="CPN Tools" version="4.0.1""#;
const FILL: &str = r#"<fillattr colour="White" pattern="" filled="false"/>"#;
const LINE: &str = r#"<lineattr colour="Black" thick="1" type="Solid"/>"#;
const TEXT: &str = r#"<textattr colour="Black" bold="false"/>"#;
const OBSERVABLE: &str = "observable: ";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EmitError {
    #[error("layout has no position for `{0}`")]
    MissingPosition(String),
}

/// 1-based position inside the document.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DocPos {
    pub line: u32,
    pub column: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CpnXmlError {
    #[error("{}:{}: malformed document: {message}", pos.line, pos.column)]
    Malformed { pos: DocPos, message: String },
    #[error("{}:{}: {message}", pos.line, pos.column)]
    Structure { pos: DocPos, message: String },
    #[error("{}:{}: in `{text}`: {source}", pos.line, pos.column)]
    Expression {
        pos: DocPos,
        text: String,
        source: MlError,
    },
}

fn esc(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            _ => out.push(c),
        }
    }
    out
}

fn fmt_num(v: f64) -> String {
    format!("{v:.6}")
}

fn posattr(out: &mut String, indent: &str, (x, y): (f64, f64)) {
    let _ = writeln!(out, r#"{indent}<posattr x="{}" y="{}"/>"#, fmt_num(x), fmt_num(y));
}

fn attrs(out: &mut String, indent: &str) {
    let _ = writeln!(out, "{indent}{FILL}\n{indent}{LINE}\n{indent}{TEXT}");
}

/// An annotation child (`type`, `initmark`, `cond`, `code`, `annot`).
fn annotation(out: &mut String, tag: &str, id: &str, pos: (f64, f64), text: &str) {
    let _ = writeln!(out, r#"      <{tag} id="{}">"#, esc(id));
    posattr(out, "        ", pos);
    attrs(out, "        ");
    let _ = writeln!(out, "        <text {TOOL}>{}</text>", esc(text));
    let _ = writeln!(out, "      </{tag}>");
}

/// Colour declarations with dependencies first, otherwise in net order.
fn declaration_order(net: &ColouredNet) -> Vec<&ColourDecl> {
    let mut done: BTreeSet<&str> = BTreeSet::new();
    let mut out = Vec::new();
    fn visit<'n>(net: &'n ColouredNet, d: &'n ColourDecl, done: &mut BTreeSet<&'n str>, out: &mut Vec<&'n ColourDecl>) {
        if !done.insert(&d.name) {
            return;
        }
        if let ColourSet::Product(cs) = &d.set {
            for c in cs {
                if let Some(dep) = net.colours.iter().find(|x| &x.name == c) {
                    visit(net, dep, done, out);
                }
            }
        }
        out.push(d);
    }
    for d in &net.colours {
        visit(net, d, &mut done, &mut out);
    }
    out
}

fn colour_ml(d: &ColourDecl) -> String {
    match &d.set {
        ColourSet::Unit => format!("colset {} = unit;", d.name),
        ColourSet::Int => format!("colset {} = int;", d.name),
        ColourSet::Enum(values) => {
            let vs: Vec<String> = values.iter().map(|v| super::ml::mangle(&d.name, v)).collect();
            format!("colset {} = with {};", d.name, vs.join(" | "))
        }
        ColourSet::Product(cs) => format!("colset {} = product {};", d.name, cs.join(" * ")),
    }
}

/// Writes `net` (canonicalised) as a CPN Tools document.
pub fn emit_cpn_xml(net: &ColouredNet, layout: &Layout) -> Result<String, EmitError> {
    let net = net.canonical();
    let pos = |id: &str| layout.get(id).ok_or_else(|| EmitError::MissingPosition(id.to_string()));
    let printer = Printer::new(&net);
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"iso-8859-1\"?>\n");
    out.push_str("<!DOCTYPE workspaceElements PUBLIC \"-//CPN//DTD CPNXML 1.0//EN\" \"http://cpntools.org/DTD/6/cpn.dtd\">\n\n");
    out.push_str("<workspaceElements>\n");
    out.push_str("  <generator tool=\"CPN Tools\" version=\"4.0.1\" format=\"6\"/>\n");
    out.push_str("  <cpnet>\n    <globbox>\n      <block id=\"decls\">\n        <id>Declarations</id>\n");
    for d in declaration_order(&net) {
        let _ = writeln!(out, r#"        <color id="colour.{}">"#, esc(&d.name));
        let _ = writeln!(out, "          <id>{}</id>", esc(&d.name));
        match &d.set {
            ColourSet::Unit => out.push_str("          <unit/>\n"),
            ColourSet::Int => out.push_str("          <int/>\n"),
            ColourSet::Enum(values) => {
                out.push_str("          <enum>\n");
                for v in values {
                    let _ = writeln!(out, "            <id>{}</id>", esc(&super::ml::mangle(&d.name, v)));
                }
                out.push_str("          </enum>\n");
            }
            ColourSet::Product(cs) => {
                out.push_str("          <product>\n");
                for c in cs {
                    let _ = writeln!(out, "            <id>{}</id>", esc(c));
                }
                out.push_str("          </product>\n");
            }
        }
        let _ = writeln!(out, "          <layout>{}</layout>", esc(&colour_ml(d)));
        out.push_str("        </color>\n");
    }
    for v in &net.variables {
        let _ = writeln!(out, r#"        <var id="var.{}">"#, esc(&v.name));
        let _ = writeln!(out, "          <type>\n            <id>{}</id>\n          </type>", esc(&v.colour));
        let _ = writeln!(out, "          <id>{}</id>", esc(&v.name));
        let _ = writeln!(out, "          <layout>var {} : {};</layout>", esc(&v.name), esc(&v.colour));
        out.push_str("        </var>\n");
    }
    out.push_str("      </block>\n    </globbox>\n");
    out.push_str("    <page id=\"page\">\n      <pageattr name=\"Net\"/>\n");

    for p in &net.places {
        let (x, y) = pos(&p.id)?;
        let _ = writeln!(out, r#"    <place id="{}">"#, esc(&p.id));
        posattr(&mut out, "      ", (x, y));
        attrs(&mut out, "      ");
        let _ = writeln!(out, "      <text>{}</text>", esc(&p.name));
        out.push_str("      <ellipse w=\"60.000000\" h=\"40.000000\"/>\n");
        out.push_str("      <token x=\"-10.000000\" y=\"0.000000\"/>\n");
        out.push_str("      <marking x=\"0.000000\" y=\"0.000000\" hidden=\"false\">\n");
        out.push_str("        <snap snap_id=\"0\" anchor.horizontal=\"0\" anchor.vertical=\"0\"/>\n");
        out.push_str("      </marking>\n");
        annotation(&mut out, "type", &format!("{}.type", p.id), (x + 30.0, y - 25.0), &p.colour);
        let init = printer.multiset(&p.initial, Some(&p.colour));
        annotation(&mut out, "initmark", &format!("{}.initmark", p.id), (x + 30.0, y + 25.0), &init);
        out.push_str("    </place>\n");
    }

    for t in &net.transitions {
        let (x, y) = pos(&t.id)?;
        let _ = writeln!(out, r#"    <trans id="{}" explicit="false">"#, esc(&t.id));
        posattr(&mut out, "      ", (x, y));
        attrs(&mut out, "      ");
        let _ = writeln!(out, "      <text>{}</text>", esc(&t.name));
        out.push_str("      <box w=\"60.000000\" h=\"40.000000\"/>\n");
        out.push_str("      <binding x=\"7.200000\" y=\"-3.000000\"/>\n");
        let guard = t
            .guard
            .as_ref()
            .map(|g| format!("[{}]", printer.expr(g, None)))
            .unwrap_or_default();
        annotation(&mut out, "cond", &format!("{}.cond", t.id), (x - 40.0, y + 30.0), &guard);
        annotation(&mut out, "time", &format!("{}.time", t.id), (x + 40.0, y + 30.0), "");
        let code = t
            .observable
            .as_ref()
            .map(|l| format!("action (* {OBSERVABLE}{l} *) ();"))
            .unwrap_or_default();
        annotation(&mut out, "code", &format!("{}.code", t.id), (x + 60.0, y - 50.0), &code);
        out.push_str("    </trans>\n");
    }

    for a in &net.arcs {
        let (px, py) = pos(&a.place)?;
        let (tx, ty) = pos(&a.transition)?;
        let colour = net.place(&a.place).map(|p| p.colour.as_str());
        let _ = writeln!(
            out,
            r#"    <arc id="{}" orientation="{}" order="1">"#,
            esc(&a.id),
            a.orientation.as_str()
        );
        posattr(&mut out, "      ", (0.0, 0.0));
        attrs(&mut out, "      ");
        out.push_str("      <arrowattr headsize=\"1.200000\" currentcyckle=\"2\"/>\n");
        let _ = writeln!(out, r#"      <transend idref="{}"/>"#, esc(&a.transition));
        let _ = writeln!(out, r#"      <placeend idref="{}"/>"#, esc(&a.place));
        let mid = ((px + tx) / 2.0, (py + ty) / 2.0 + 10.0);
        let text = printer.expr(&a.inscription, colour);
        annotation(&mut out, "annot", &format!("{}.annot", a.id), mid, &text);
        out.push_str("    </arc>\n");
    }
    out.push_str("    </page>\n");
    out.push_str("    <instances>\n      <instance id=\"instance\" page=\"page\"/>\n    </instances>\n");
    out.push_str("  </cpnet>\n</workspaceElements>\n");
    Ok(out)
}

struct Doc<'d> {
    doc: &'d roxmltree::Document<'d>,
}

impl<'d> Doc<'d> {
    fn pos(&self, node: roxmltree::Node) -> DocPos {
        let p = self.doc.text_pos_at(node.range().start);
        DocPos {
            line: p.row,
            column: p.col,
        }
    }

    fn err(&self, node: roxmltree::Node, message: impl Into<String>) -> CpnXmlError {
        CpnXmlError::Structure {
            pos: self.pos(node),
            message: message.into(),
        }
    }

    fn child<'a>(&self, node: roxmltree::Node<'a, 'd>, tag: &str) -> Result<roxmltree::Node<'a, 'd>, CpnXmlError> {
        node.children()
            .find(|c| c.has_tag_name(tag))
            .ok_or_else(|| self.err(node, format!("<{}> lacks <{tag}>", node.tag_name().name())))
    }

    fn attr<'a>(&self, node: roxmltree::Node<'a, 'd>, name: &str) -> Result<&'a str, CpnXmlError> {
        node.attribute(name)
            .ok_or_else(|| self.err(node, format!("<{}> lacks attribute `{name}`", node.tag_name().name())))
    }

    fn text(&self, node: roxmltree::Node, tag: &str) -> Result<String, CpnXmlError> {
        Ok(self.child(node, tag)?.text().unwrap_or("").to_string())
    }

    /// Text of annotation `tag` (its inner `<text>`), empty when absent.
    fn annotation(&self, node: roxmltree::Node, tag: &str) -> Result<(String, DocPos), CpnXmlError> {
        match node.children().find(|c| c.has_tag_name(tag)) {
            Some(a) => {
                let t = self.child(a, "text")?;
                Ok((t.text().unwrap_or("").to_string(), self.pos(t)))
            }
            None => Ok((String::new(), self.pos(node))),
        }
    }
}

fn end_position(text: &str) -> DocPos {
    let line = text.matches('\n').count() + 1;
    let column = text.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    DocPos {
        line: line as u32,
        column: column as u32,
    }
}

fn expr_err(pos: DocPos, text: &str, source: MlError) -> CpnXmlError {
    CpnXmlError::Expression {
        pos,
        text: text.to_string(),
        source,
    }
}

/// Reads a document written by [`emit_cpn_xml`]. Layout is discarded and the
/// result is in canonical order.
pub fn parse_cpn_xml(text: &str) -> Result<ColouredNet, CpnXmlError> {
    let options = roxmltree::ParsingOptions {
        allow_dtd: true,
        ..Default::default()
    };
    let doc = roxmltree::Document::parse_with_options(text, options).map_err(|e| {
        let pos = match e {
            // roxmltree reports no position here; the end of input is the culprit.
            roxmltree::Error::UnexpectedEndOfStream => end_position(text),
            _ => DocPos {
                line: e.pos().row,
                column: e.pos().col,
            },
        };
        CpnXmlError::Malformed {
            pos,
            message: e.to_string(),
        }
    })?;
    let d = Doc { doc: &doc };
    let root = doc.root_element();
    if !root.has_tag_name("workspaceElements") {
        return Err(d.err(root, "root element is not <workspaceElements>"));
    }
    let cpnet = d.child(root, "cpnet")?;
    let mut net = ColouredNet::default();

    let globbox = d.child(cpnet, "globbox")?;
    for decl in globbox.descendants().filter(|n| n.is_element()) {
        match decl.tag_name().name() {
            "color" => {
                let name = d.text(decl, "id")?;
                let body = decl
                    .children()
                    .find(|c| c.is_element() && !c.has_tag_name("id") && !c.has_tag_name("layout"))
                    .ok_or_else(|| d.err(decl, format!("colour `{name}` has no definition")))?;
                let ids = || -> Vec<String> {
                    body.children()
                        .filter(|c| c.has_tag_name("id"))
                        .map(|c| c.text().unwrap_or("").to_string())
                        .collect()
                };
                let set = match body.tag_name().name() {
                    "unit" => ColourSet::Unit,
                    "int" => ColourSet::Int,
                    "product" => ColourSet::Product(ids()),
                    "enum" => {
                        let prefix = format!("{name}_");
                        let mut values = Vec::new();
                        for v in ids() {
                            let value = v
                                .strip_prefix(&prefix)
                                .ok_or_else(|| d.err(body, format!("constant `{v}` lacks prefix `{prefix}`")))?;
                            values.push(value.to_string());
                        }
                        ColourSet::Enum(values)
                    }
                    other => return Err(d.err(body, format!("unsupported colour set <{other}>"))),
                };
                net.colours.push(ColourDecl { name, set });
            }
            "var" => {
                let colour = d.text(d.child(decl, "type")?, "id")?;
                let names: Vec<String> = decl
                    .children()
                    .filter(|c| c.has_tag_name("id"))
                    .map(|c| c.text().unwrap_or("").to_string())
                    .collect();
                for name in names {
                    net.variables.push(VarDecl {
                        name,
                        colour: colour.clone(),
                    });
                }
            }
            _ => {}
        }
    }

    let page = d.child(cpnet, "page")?;
    let mut place_colour: HashMap<String, String> = HashMap::new();
    let mut pending_arcs = Vec::new();
    for node in page.children().filter(|n| n.is_element()) {
        match node.tag_name().name() {
            "place" => {
                let id = d.attr(node, "id")?.to_string();
                let name = d.text(node, "text")?;
                let (colour, _) = d.annotation(node, "type")?;
                let colour = colour.trim().to_string();
                let (init, at) = d.annotation(node, "initmark")?;
                let initial = Reader::new(&net)
                    .multiset(&init, Some(&colour))
                    .map_err(|e| expr_err(at, &init, e))?;
                place_colour.insert(id.clone(), colour.clone());
                net.places.push(Place {
                    id,
                    name,
                    colour,
                    initial,
                });
            }
            "trans" => {
                let id = d.attr(node, "id")?.to_string();
                let name = d.text(node, "text")?;
                let (cond, at) = d.annotation(node, "cond")?;
                let cond = cond.trim();
                let guard = if cond.is_empty() {
                    None
                } else {
                    let inner = cond
                        .strip_prefix('[')
                        .and_then(|c| c.strip_suffix(']'))
                        .ok_or_else(|| d.err(node, "guard is not bracketed"))?;
                    Some(Reader::new(&net).expr(inner, None).map_err(|e| expr_err(at, inner, e))?)
                };
                let (code, _) = d.annotation(node, "code")?;
                let observable = code
                    .split_once(OBSERVABLE)
                    .and_then(|(_, rest)| rest.split_once(" *)"))
                    .map(|(label, _)| label.to_string());
                net.transitions.push(Transition {
                    id,
                    name,
                    guard,
                    observable,
                });
            }
            "arc" => pending_arcs.push(node),
            _ => {}
        }
    }
    for node in pending_arcs {
        let id = d.attr(node, "id")?.to_string();
        let orientation = match d.attr(node, "orientation")? {
            "PtoT" => Orientation::PtoT,
            "TtoP" => Orientation::TtoP,
            other => return Err(d.err(node, format!("unsupported orientation `{other}`"))),
        };
        let transition = d.attr(d.child(node, "transend")?, "idref")?.to_string();
        let place = d.attr(d.child(node, "placeend")?, "idref")?.to_string();
        let colour = place_colour.get(&place).map(String::as_str);
        let (text, at) = d.annotation(node, "annot")?;
        let inscription = Reader::new(&net)
            .expr(&text, colour)
            .map_err(|e| expr_err(at, &text, e))?;
        net.arcs.push(Arc {
            id,
            place,
            transition,
            orientation,
            inscription,
        });
    }
    net.canonicalize();
    Ok(net)
}
