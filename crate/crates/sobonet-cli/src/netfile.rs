//! Network files: a JSON document with every weight as a hex-float string,
//! so a written network reloads with identical bit patterns.
//!
//! Layout: `{"activation": name, "activation_param": hex (when the
//! activation takes one), "input_dim": d, "layers": [{"rows", "cols",
//! "entries": [[row, col, hex]], "bias": [hex, ...]}]}`.

use anyhow::{bail, Context, Result};
use serde_json::{json, Map, Value};
use sobonet_core::act::lookup;
use sobonet_core::net::{Layer, Network};

use crate::hexfloat::{format_hex, parse_hex};

pub fn network_to_json(net: &Network) -> Value {
    let layers: Vec<Value> = net
        .layers
        .iter()
        .map(|layer| {
            let entries: Vec<Value> = layer
                .entries
                .iter()
                .map(|&(i, j, w)| json!([i, j, format_hex(w)]))
                .collect();
            let bias: Vec<Value> = layer.bias.iter().map(|&b| json!(format_hex(b))).collect();
            json!({"rows": layer.rows, "cols": layer.cols, "entries": entries, "bias": bias})
        })
        .collect();
    let mut doc = Map::new();
    doc.insert("activation".into(), json!(net.activation.name()));
    if let Some(p) = net.activation.param() {
        doc.insert("activation_param".into(), json!(format_hex(p)));
    }
    doc.insert("input_dim".into(), json!(net.input_dim));
    doc.insert("layers".into(), Value::Array(layers));
    Value::Object(doc)
}

pub fn write_network(net: &Network, path: &std::path::Path) -> Result<()> {
    let text = serde_json::to_string_pretty(&network_to_json(net))?;
    std::fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn read_network(path: &std::path::Path) -> Result<Network> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let doc: Value = serde_json::from_str(&text)
        .with_context(|| format!("{} is not valid JSON", path.display()))?;
    network_from_json(&doc).with_context(|| format!("{} is not a network file", path.display()))
}

fn get<'a>(doc: &'a Value, key: &str) -> Result<&'a Value> {
    doc.get(key).with_context(|| format!("missing field {key:?}"))
}

fn as_usize(v: &Value, what: &str) -> Result<usize> {
    v.as_u64().map(|n| n as usize).with_context(|| format!("{what} must be a nonnegative integer"))
}

fn as_hex(v: &Value, what: &str) -> Result<f64> {
    let s = v.as_str().with_context(|| format!("{what} must be a hex-float string"))?;
    parse_hex(s).map_err(anyhow::Error::msg)
}

pub fn network_from_json(doc: &Value) -> Result<Network> {
    let name = get(doc, "activation")?
        .as_str()
        .context("activation must be a string")?;
    let param = match doc.get("activation_param") {
        Some(v) => Some(as_hex(v, "activation_param")?),
        None => None,
    };
    let act = lookup(name, param).map_err(|e| anyhow::anyhow!("{e}"))?;
    let input_dim = as_usize(get(doc, "input_dim")?, "input_dim")?;
    let raw_layers = get(doc, "layers")?.as_array().context("layers must be an array")?;
    let mut layers = Vec::with_capacity(raw_layers.len());
    for (li, lv) in raw_layers.iter().enumerate() {
        let rows = as_usize(get(lv, "rows")?, "rows")?;
        let cols = as_usize(get(lv, "cols")?, "cols")?;
        if rows == 0 {
            bail!("layer {li}: rows must be positive");
        }
        let raw_entries = get(lv, "entries")?.as_array().context("entries must be an array")?;
        let mut entries = Vec::with_capacity(raw_entries.len());
        for ev in raw_entries {
            let triple = ev.as_array().filter(|a| a.len() == 3).with_context(|| {
                format!("layer {li}: each entry must be a [row, col, weight] triple")
            })?;
            let i = as_usize(&triple[0], "entry row")?;
            let j = as_usize(&triple[1], "entry col")?;
            if i >= rows || j >= cols {
                bail!("layer {li}: entry ({i}, {j}) out of bounds for {rows}x{cols}");
            }
            entries.push((i as u32, j as u32, as_hex(&triple[2], "entry weight")?));
        }
        let mut sorted: Vec<(u32, u32)> = entries.iter().map(|e| (e.0, e.1)).collect();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            bail!("layer {li}: duplicate entry position");
        }
        let raw_bias = get(lv, "bias")?.as_array().context("bias must be an array")?;
        if raw_bias.len() != rows {
            bail!("layer {li}: bias length {} does not match rows {rows}", raw_bias.len());
        }
        let mut bias = Vec::with_capacity(rows);
        for bv in raw_bias {
            bias.push(as_hex(bv, "bias value")?);
        }
        layers.push(Layer::new(rows, cols, entries, bias));
    }
    Network::new(input_dim, act, layers).map_err(|e| anyhow::anyhow!("{e}"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use sobonet_core::gadgets::mult_net;

    #[test]
    fn network_roundtrips_bitwise_through_json() {
        let act = lookup("sigmoid", None).unwrap();
        let (net, _) = mult_net(&act, 2.0, 0.05).unwrap();
        let doc = network_to_json(&net);
        let back = network_from_json(&doc).unwrap();
        assert_eq!(back.input_dim, net.input_dim);
        assert_eq!(back.layers.len(), net.layers.len());
        for (bl, ol) in back.layers.iter().zip(&net.layers) {
            assert_eq!(bl.entries.len(), ol.entries.len());
            for (be, oe) in bl.entries.iter().zip(&ol.entries) {
                assert_eq!((be.0, be.1), (oe.0, oe.1));
                assert_eq!(be.2.to_bits(), oe.2.to_bits());
            }
            for (bb, ob) in bl.bias.iter().zip(&ol.bias) {
                assert_eq!(bb.to_bits(), ob.to_bits());
            }
        }
        let x = [0.3, -0.7];
        assert_eq!(
            back.realize(&x).unwrap()[0].to_bits(),
            net.realize(&x).unwrap()[0].to_bits()
        );
    }

    #[test]
    fn rejects_structural_damage() {
        let act = lookup("sigmoid", None).unwrap();
        let (net, _) = mult_net(&act, 2.0, 0.05).unwrap();
        let good = network_to_json(&net);

        let mut bad = good.clone();
        bad["layers"][0]["entries"][0][0] = serde_json::json!(9999);
        assert!(network_from_json(&bad).is_err(), "out-of-bounds row accepted");

        let mut bad = good.clone();
        bad["layers"][0]["bias"] = serde_json::json!(["0x1p+0"]);
        assert!(network_from_json(&bad).is_err(), "short bias accepted");

        let mut bad = good.clone();
        bad["activation"] = serde_json::json!("selu");
        assert!(network_from_json(&bad).is_err(), "unknown activation accepted");

        let mut bad = good;
        bad["layers"][1]["cols"] = serde_json::json!(7);
        assert!(network_from_json(&bad).is_err(), "layer width mismatch accepted");
    }
}
