//! JSON encodings of domains, values, labels, graphs and snapshots.
//!
//! One file format covers every structure: a graph file names its flow
//! domain and label domain, and a snapshot adds heap records and the map
//! from marked cells to nodes. Canonical form sorts keys, omits zero
//! edges and inflow entries, omits labels equal to the label domain's
//! bottom, and omits empty sections.

use flowcore::{
    Addr, ExtInt, ExtNat, Flat, FlowDomain, FlowGraph, FlowValue, Heap, HeapValue, InflowedGraph, KeySet, LabelDomain,
    LastEdge, LockTag, NodeId, NodeLabel, Record, State,
};
use serde_json::{json, Map, Value};
use std::collections::BTreeMap;

pub type Result<T> = std::result::Result<T, String>;

/// Builds an object with keys in sorted order.
pub fn obj<K: Into<String>>(pairs: impl IntoIterator<Item = (K, Value)>) -> Value {
    let mut v: Vec<(String, Value)> = pairs.into_iter().map(|(k, v)| (k.into(), v)).collect();
    v.sort_by(|a, b| a.0.cmp(&b.0));
    Value::Object(v.into_iter().collect::<Map<String, Value>>())
}

fn fields<'a>(j: &'a Value, what: &str, allowed: &[&str]) -> Result<&'a Map<String, Value>> {
    let m = j.as_object().ok_or_else(|| format!("{what} must be an object"))?;
    if let Some(k) = m.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(format!("unknown field {k} in {what}"));
    }
    Ok(m)
}

fn pair<'a>(j: &'a Value, what: &str) -> Result<(&'a Value, &'a Value)> {
    match j.as_array().map(|a| a.as_slice()) {
        Some([a, b]) => Ok((a, b)),
        _ => Err(format!("{what} must be a two-element array")),
    }
}

fn string<'a>(j: &'a Value, what: &str) -> Result<&'a str> {
    j.as_str().ok_or_else(|| format!("{what} must be a string"))
}

fn node_id(j: &Value, what: &str) -> Result<NodeId> {
    let s = string(j, what)?;
    if s.is_empty() {
        return Err(format!("{what} must not be empty"));
    }
    Ok(NodeId::new(s))
}

// Domains

pub fn encode_domain(d: &FlowDomain) -> Value {
    match d {
        FlowDomain::PathCount => json!("path_count"),
        FlowDomain::KeySet => json!("keyset"),
        FlowDomain::LowerBound => json!("lower_bound"),
        FlowDomain::UpperBound => json!("upper_bound"),
        FlowDomain::LastEdge => json!("last_edge"),
        FlowDomain::Product(a, b) => json!([encode_domain(a), encode_domain(b)]),
    }
}

pub fn decode_domain(j: &Value) -> Result<FlowDomain> {
    if j.is_array() {
        let (a, b) = pair(j, "product domain")?;
        return Ok(FlowDomain::Product(Box::new(decode_domain(a)?), Box::new(decode_domain(b)?)));
    }
    Ok(match string(j, "domain")? {
        "path_count" => FlowDomain::PathCount,
        "keyset" => FlowDomain::KeySet,
        "lower_bound" => FlowDomain::LowerBound,
        "upper_bound" => FlowDomain::UpperBound,
        "last_edge" => FlowDomain::LastEdge,
        x => return Err(format!("unknown domain {x}")),
    })
}

/// Parses a domain named on the command line: a base name, or
/// `a*b` for a product.
pub fn parse_domain(s: &str) -> Result<FlowDomain> {
    match s.split_once('*') {
        Some((a, b)) => Ok(FlowDomain::Product(Box::new(parse_domain(a)?), Box::new(parse_domain(b)?))),
        None => decode_domain(&json!(s.trim())),
    }
}

pub fn encode_label_domain(a: &LabelDomain) -> Value {
    match a {
        LabelDomain::Unit => json!("unit"),
        LabelDomain::Flat => json!("flat"),
        LabelDomain::KeyPowerset => json!("keys"),
        LabelDomain::Lockset => json!("locks"),
        LabelDomain::Product(x, y) => json!([encode_label_domain(x), encode_label_domain(y)]),
    }
}

pub fn decode_label_domain(j: &Value) -> Result<LabelDomain> {
    if j.is_array() {
        let (a, b) = pair(j, "product label domain")?;
        return Ok(LabelDomain::Product(Box::new(decode_label_domain(a)?), Box::new(decode_label_domain(b)?)));
    }
    Ok(match string(j, "label domain")? {
        "unit" => LabelDomain::Unit,
        "flat" => LabelDomain::Flat,
        "keys" => LabelDomain::KeyPowerset,
        "locks" => LabelDomain::Lockset,
        x => return Err(format!("unknown label domain {x}")),
    })
}

// Values

pub fn encode_ext_int(x: ExtInt) -> Value {
    match x {
        ExtInt::NegInf => json!("-inf"),
        ExtInt::Fin(k) => json!(k),
        ExtInt::PosInf => json!("inf"),
    }
}

pub fn decode_ext_int(j: &Value) -> Result<ExtInt> {
    match j {
        Value::String(s) if s == "-inf" => Ok(ExtInt::NegInf),
        Value::String(s) if s == "inf" => Ok(ExtInt::PosInf),
        _ => j.as_i64().map(ExtInt::Fin).ok_or_else(|| format!("bad bound {j}")),
    }
}

pub fn encode_keyset(s: &KeySet) -> Value {
    Value::Array(s.intervals().iter().map(|(lo, hi)| json!([encode_ext_int(*lo), encode_ext_int(*hi)])).collect())
}

pub fn decode_keyset(j: &Value) -> Result<KeySet> {
    let arr = j.as_array().ok_or("keyset must be an array of [lo, hi) pairs")?;
    let mut ivs = Vec::new();
    for iv in arr {
        let (lo, hi) = pair(iv, "keyset interval")?;
        let (lo, hi) = (decode_ext_int(lo)?, decode_ext_int(hi)?);
        if lo == ExtInt::PosInf || hi == ExtInt::NegInf {
            return Err(format!("bad interval {iv}"));
        }
        ivs.push((lo, hi));
    }
    Ok(KeySet::from_intervals(ivs))
}

pub fn encode_value(v: &FlowValue) -> Value {
    match v {
        FlowValue::Count(ExtNat::Fin(n)) => json!(n),
        FlowValue::Count(ExtNat::Inf) => json!("inf"),
        FlowValue::Keys(s) => encode_keyset(s),
        FlowValue::Lower(b) | FlowValue::Upper(b) => encode_ext_int(*b),
        FlowValue::Last(LastEdge::Zero) => json!("zero"),
        FlowValue::Last(LastEdge::One) => json!("one"),
        FlowValue::Last(LastEdge::Tag(t)) => json!(t),
        FlowValue::Last(LastEdge::Top) => json!("top"),
        FlowValue::Pair(a, b) => json!([encode_value(a), encode_value(b)]),
    }
}

pub fn decode_value(d: &FlowDomain, j: &Value) -> Result<FlowValue> {
    Ok(match d {
        FlowDomain::PathCount => match j {
            Value::String(s) if s == "inf" => FlowValue::inf(),
            _ => FlowValue::count(j.as_u64().ok_or_else(|| format!("bad path count {j}"))?),
        },
        FlowDomain::KeySet => FlowValue::Keys(decode_keyset(j)?),
        FlowDomain::LowerBound => FlowValue::Lower(decode_ext_int(j)?),
        FlowDomain::UpperBound => FlowValue::Upper(decode_ext_int(j)?),
        FlowDomain::LastEdge => FlowValue::Last(match j {
            Value::String(s) if s == "zero" => LastEdge::Zero,
            Value::String(s) if s == "one" => LastEdge::One,
            Value::String(s) if s == "top" => LastEdge::Top,
            _ => LastEdge::Tag(j.as_u64().ok_or_else(|| format!("bad last-edge value {j}"))?),
        }),
        FlowDomain::Product(a, b) => {
            let (x, y) = pair(j, "product value")?;
            FlowValue::pair(decode_value(a, x)?, decode_value(b, y)?)
        }
    })
}

// Labels

pub fn encode_label(l: &NodeLabel) -> Value {
    match l {
        NodeLabel::Unit => Value::Null,
        NodeLabel::Flat(Flat::Bottom) => json!("unmarked"),
        NodeLabel::Flat(Flat::Elem(t)) => json!({ "tid": t }),
        NodeLabel::Flat(Flat::Top) => json!("top"),
        NodeLabel::Keys(s) => encode_keyset(s),
        NodeLabel::Locks(ls) => Value::Array(
            ls.iter()
                .map(|t| match t {
                    LockTag::Held(t) => json!(t),
                    LockTag::Dirty(t) => json!(format!("~{t}")),
                })
                .collect(),
        ),
        NodeLabel::Pair(a, b) => json!([encode_label(a), encode_label(b)]),
    }
}

pub fn decode_label(a: &LabelDomain, j: &Value) -> Result<NodeLabel> {
    Ok(match a {
        LabelDomain::Unit => match j {
            Value::Null => NodeLabel::Unit,
            _ => return Err(format!("unit label must be null, got {j}")),
        },
        LabelDomain::Flat => match j {
            Value::String(s) if s == "unmarked" => NodeLabel::Flat(Flat::Bottom),
            Value::String(s) if s == "top" => NodeLabel::Flat(Flat::Top),
            _ => {
                let m = fields(j, "Harris label", &["tid"])?;
                let t = m.get("tid").and_then(Value::as_u64).ok_or_else(|| format!("bad Harris label {j}"))?;
                NodeLabel::Flat(Flat::Elem(t))
            }
        },
        LabelDomain::KeyPowerset => NodeLabel::Keys(decode_keyset(j)?),
        LabelDomain::Lockset => {
            let arr = j.as_array().ok_or("lock set must be an array")?;
            let mut ls = Vec::new();
            for x in arr {
                ls.push(match x {
                    Value::String(s) => {
                        let t = s.strip_prefix('~').and_then(|t| t.parse().ok()).ok_or_else(|| format!("bad lock tag {s}"))?;
                        LockTag::Dirty(t)
                    }
                    _ => LockTag::Held(x.as_u64().ok_or_else(|| format!("bad lock tag {x}"))?),
                });
            }
            NodeLabel::Locks(ls.into_iter().collect())
        }
        LabelDomain::Product(x, y) => {
            let (p, q) = pair(j, "product label")?;
            NodeLabel::pair(decode_label(x, p)?, decode_label(y, q)?)
        }
    })
}

// Heap values

pub fn encode_heap_value(v: &HeapValue) -> Value {
    match v {
        HeapValue::Null => Value::Null,
        HeapValue::Int(i) => json!(i),
        HeapValue::Key(x) => json!({ "key": encode_ext_int(*x) }),
        HeapValue::Ptr { addr, marked: false } => json!({ "ptr": addr.as_str() }),
        HeapValue::Ptr { addr, marked: true } => json!({ "ptr": addr.as_str(), "marked": true }),
        HeapValue::List(xs) => Value::Array(xs.iter().map(encode_heap_value).collect()),
    }
}

pub fn decode_heap_value(j: &Value) -> Result<HeapValue> {
    Ok(match j {
        Value::Null => HeapValue::Null,
        Value::Number(_) => HeapValue::Int(j.as_i64().ok_or_else(|| format!("bad integer {j}"))?),
        Value::Array(xs) => HeapValue::List(xs.iter().map(decode_heap_value).collect::<Result<_>>()?),
        Value::Object(m) if m.contains_key("key") => {
            fields(j, "key value", &["key"])?;
            HeapValue::Key(decode_ext_int(&m["key"])?)
        }
        Value::Object(m) if m.contains_key("ptr") => {
            fields(j, "pointer", &["ptr", "marked"])?;
            let marked = match m.get("marked") {
                None => false,
                Some(Value::Bool(b)) => *b,
                Some(x) => return Err(format!("marked must be a boolean, got {x}")),
            };
            if m.get("marked") == Some(&Value::Bool(false)) {
                return Err("write unmarked pointers without a marked field".into());
            }
            HeapValue::Ptr {
                addr: node_id(&m["ptr"], "pointer target")?,
                marked,
            }
        }
        _ => return Err(format!("bad heap value {j}")),
    })
}

// Graph and snapshot files

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphDoc {
    pub domain: FlowDomain,
    pub labels: LabelDomain,
    pub graph: InflowedGraph,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SnapshotDoc {
    pub domain: FlowDomain,
    pub labels: LabelDomain,
    pub state: State,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Doc {
    Graph(GraphDoc),
    Snapshot(SnapshotDoc),
}

impl Doc {
    pub fn domain(&self) -> &FlowDomain {
        match self {
            Doc::Graph(g) => &g.domain,
            Doc::Snapshot(s) => &s.domain,
        }
    }

    pub fn labels(&self) -> &LabelDomain {
        match self {
            Doc::Graph(g) => &g.labels,
            Doc::Snapshot(s) => &s.labels,
        }
    }

    pub fn graph(&self) -> &InflowedGraph {
        match self {
            Doc::Graph(g) => &g.graph,
            Doc::Snapshot(s) => s.state.graph(),
        }
    }
}

fn encode_graph_fields(d: &FlowDomain, a: &LabelDomain, h: &InflowedGraph) -> Vec<(String, Value)> {
    let g = h.graph();
    let bottom = a.bottom();
    let nodes: Vec<Value> = g
        .labels()
        .iter()
        .map(|(n, l)| {
            let mut f = vec![("id".to_string(), json!(n.as_str()))];
            if *l != bottom {
                f.push(("label".into(), encode_label(l)));
            }
            let edges: Vec<(String, Value)> = g
                .out_edges(n)
                .iter()
                .filter(|(_, v)| !v.is_zero())
                .map(|(t, v)| (t.to_string(), encode_value(v)))
                .collect();
            if !edges.is_empty() {
                f.push(("edges".into(), obj(edges)));
            }
            obj(f)
        })
        .collect();
    let mut out = vec![
        ("domain".to_string(), encode_domain(d)),
        ("labels".to_string(), encode_label_domain(a)),
        ("nodes".to_string(), Value::Array(nodes)),
    ];
    if !g.sinks().is_empty() {
        out.push(("sinks".into(), json!(g.sinks().iter().map(|s| s.as_str()).collect::<Vec<_>>())));
    }
    let inflow: Vec<(String, Value)> =
        h.inflow().iter().filter(|(_, v)| !v.is_zero()).map(|(n, v)| (n.to_string(), encode_value(v))).collect();
    if !inflow.is_empty() {
        out.push(("inflow".into(), obj(inflow)));
    }
    out
}

pub fn encode_graph(doc: &GraphDoc) -> Value {
    obj(encode_graph_fields(&doc.domain, &doc.labels, &doc.graph))
}

pub fn encode_snapshot(doc: &SnapshotDoc) -> Value {
    let s = &doc.state;
    let mut f = encode_graph_fields(&doc.domain, &doc.labels, s.graph());
    let heap: Vec<(String, Value)> = s
        .heap()
        .iter()
        .map(|(x, rec)| (x.to_string(), obj(rec.iter().map(|(k, v)| (k.clone(), encode_heap_value(v))))))
        .collect();
    f.push(("heap".into(), obj(heap)));
    // Graph nodes map to themselves; only other marked cells are listed.
    let g = s.graph().graph();
    let nodemap: Vec<(String, Value)> = s
        .nodemap()
        .iter()
        .filter(|(x, _)| !g.contains(x))
        .map(|(x, n)| (x.to_string(), json!(n.as_str())))
        .collect();
    if !nodemap.is_empty() {
        f.push(("nodemap".into(), obj(nodemap)));
    }
    obj(f)
}

const GRAPH_FIELDS: [&str; 5] = ["domain", "labels", "nodes", "sinks", "inflow"];
const SNAPSHOT_FIELDS: [&str; 7] = ["domain", "labels", "nodes", "sinks", "inflow", "heap", "nodemap"];

fn decode_graph_fields(m: &Map<String, Value>, default_domain: Option<&FlowDomain>) -> Result<GraphDoc> {
    let domain = match (m.get("domain"), default_domain) {
        (Some(j), Some(d)) => {
            let fd = decode_domain(j)?;
            if fd != *d {
                return Err(format!("file domain {fd} does not match requested domain {d}"));
            }
            fd
        }
        (Some(j), None) => decode_domain(j)?,
        (None, Some(d)) => d.clone(),
        (None, None) => return Err("missing domain".into()),
    };
    let labels = match m.get("labels") {
        Some(j) => decode_label_domain(j)?,
        None => LabelDomain::Unit,
    };
    let nodes = m.get("nodes").map_or(Ok(&[][..]), |j| j.as_array().map(|a| a.as_slice()).ok_or("nodes must be an array"))?;
    let mut g = FlowGraph::new();
    let mut edges = Vec::new();
    for nj in nodes {
        let nm = fields(nj, "node", &["id", "label", "edges"])?;
        let id = node_id(nm.get("id").ok_or("node without id")?, "node id")?;
        let label = match nm.get("label") {
            Some(l) => decode_label(&labels, l)?,
            None => labels.bottom(),
        };
        g.add_node(id.clone(), label).map_err(|e| e.to_string())?;
        if let Some(ej) = nm.get("edges") {
            let em = ej.as_object().ok_or_else(|| format!("edges of {id} must be an object"))?;
            for (t, v) in em {
                edges.push((id.clone(), node_id(&json!(t), "edge target")?, decode_value(&domain, v)?));
            }
        }
    }
    if let Some(sj) = m.get("sinks") {
        for s in sj.as_array().ok_or("sinks must be an array")? {
            g.add_sink(node_id(s, "sink")?).map_err(|e| e.to_string())?;
        }
    }
    for (s, t, v) in edges {
        g.set_edge(&s, &t, v).map_err(|e| e.to_string())?;
    }
    let mut inflow = BTreeMap::new();
    if let Some(ij) = m.get("inflow") {
        for (n, v) in ij.as_object().ok_or("inflow must be an object")? {
            inflow.insert(NodeId::new(n), decode_value(&domain, v)?);
        }
    }
    let graph = InflowedGraph::new(g, inflow, &domain).map_err(|e| e.to_string())?;
    Ok(GraphDoc { domain, labels, graph })
}

/// Parses a graph or snapshot file. `domain`, when given, must agree
/// with the file's domain, or supplies it when the file has none.
pub fn decode_doc(j: &Value, domain: Option<&FlowDomain>) -> Result<Doc> {
    let m = j.as_object().ok_or("file must be a JSON object")?;
    if !m.contains_key("heap") {
        fields(j, "graph file", &GRAPH_FIELDS)?;
        return Ok(Doc::Graph(decode_graph_fields(m, domain)?));
    }
    fields(j, "snapshot file", &SNAPSHOT_FIELDS)?;
    let gd = decode_graph_fields(m, domain)?;
    let mut heap = Heap::new();
    for (x, rj) in m["heap"].as_object().ok_or("heap must be an object")? {
        let mut rec = Record::new();
        for (f, v) in rj.as_object().ok_or_else(|| format!("heap cell {x} must be an object"))? {
            rec.insert(f.clone(), decode_heap_value(v)?);
        }
        heap.insert(node_id(&json!(x), "heap address")?, rec);
    }
    let mut nodemap: BTreeMap<Addr, NodeId> = gd.graph.graph().nodes().map(|n| (n.clone(), n.clone())).collect();
    if let Some(nj) = m.get("nodemap") {
        for (x, n) in nj.as_object().ok_or("nodemap must be an object")? {
            let x = NodeId::new(x);
            if gd.graph.graph().contains(&x) {
                return Err(format!("nodemap entry for node {x}; nodes map to themselves"));
            }
            nodemap.insert(x, node_id(n, "nodemap target")?);
        }
    }
    let state = State::new(heap, gd.graph, nodemap).map_err(|e| e.to_string())?;
    Ok(Doc::Snapshot(SnapshotDoc {
        domain: gd.domain,
        labels: gd.labels,
        state,
    }))
}

pub fn encode_doc(doc: &Doc) -> Value {
    match doc {
        Doc::Graph(g) => encode_graph(g),
        Doc::Snapshot(s) => encode_snapshot(s),
    }
}

/// Canonical text: objects one key per line, arrays of scalars and
/// nested arrays on one line, two-space indent, trailing newline.
pub fn to_text(v: &Value) -> String {
    let mut out = String::new();
    write_value(v, 0, &mut out);
    out.push('\n');
    out
}

fn has_object(v: &Value) -> bool {
    match v {
        Value::Object(_) => true,
        Value::Array(xs) => xs.iter().any(has_object),
        _ => false,
    }
}

fn write_value(v: &Value, indent: usize, out: &mut String) {
    let pad = |n: usize| "  ".repeat(n);
    match v {
        Value::Object(m) if !m.is_empty() => {
            out.push_str("{\n");
            let mut keys: Vec<&String> = m.keys().collect();
            keys.sort();
            for (i, k) in keys.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                out.push_str(&Value::String((*k).clone()).to_string());
                out.push_str(": ");
                write_value(&m[k.as_str()], indent + 1, out);
                if i + 1 < keys.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            out.push_str(&pad(indent));
            out.push('}');
        }
        Value::Array(xs) if has_object(v) => {
            out.push_str("[\n");
            for (i, x) in xs.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                write_value(x, indent + 1, out);
                if i + 1 < xs.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            out.push_str(&pad(indent));
            out.push(']');
        }
        Value::Array(xs) => {
            out.push('[');
            for (i, x) in xs.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_value(x, indent, out);
            }
            out.push(']');
        }
        _ => out.push_str(&v.to_string()),
    }
}

pub fn parse_text(s: &str) -> Result<Value> {
    serde_json::from_str(s).map_err(|e| format!("invalid JSON: {e}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values_round_trip() {
        let d = FlowDomain::Product(Box::new(FlowDomain::PathCount), Box::new(FlowDomain::KeySet));
        let v = FlowValue::pair(FlowValue::inf(), FlowValue::Keys(KeySet::interval(ExtInt::NegInf, ExtInt::Fin(3))));
        let j = encode_value(&v);
        assert_eq!(j, json!(["inf", [["-inf", 3]]]));
        assert_eq!(decode_value(&d, &j).unwrap(), v);
        for x in [LastEdge::Zero, LastEdge::One, LastEdge::Tag(4), LastEdge::Top] {
            let v = FlowValue::Last(x);
            assert_eq!(decode_value(&FlowDomain::LastEdge, &encode_value(&v)).unwrap(), v);
        }
        assert!(decode_value(&FlowDomain::PathCount, &json!(-1)).is_err());
    }

    #[test]
    fn labels_round_trip() {
        let a = LabelDomain::dictionary();
        let l = NodeLabel::dict(KeySet::from_keys([1, 2]), [LockTag::Held(0), LockTag::Dirty(2)]);
        let j = encode_label(&l);
        assert_eq!(j, json!([[[1, 3]], [0, "~2"]]));
        assert_eq!(decode_label(&a, &j).unwrap(), l);
        assert_eq!(decode_label(&LabelDomain::Flat, &json!({"tid": 3})).unwrap(), NodeLabel::Flat(Flat::Elem(3)));
        assert!(decode_label(&LabelDomain::Flat, &json!({"tid": 3, "x": 1})).is_err());
    }

    #[test]
    fn heap_values_round_trip() {
        let v = HeapValue::List(vec![
            HeapValue::Null,
            HeapValue::Int(-2),
            HeapValue::Key(ExtInt::PosInf),
            HeapValue::Ptr {
                addr: NodeId::new("a"),
                marked: true,
            },
            HeapValue::ptr("b"),
        ]);
        assert_eq!(decode_heap_value(&encode_heap_value(&v)).unwrap(), v);
    }

    #[test]
    fn text_layout() {
        let v = json!({"b": [1, [2, 3]], "a": {"x": null}});
        assert_eq!(to_text(&v), "{\n  \"a\": {\n    \"x\": null\n  },\n  \"b\": [1, [2, 3]]\n}\n");
        assert_eq!(to_text(&json!({})), "{}\n");
    }
}
