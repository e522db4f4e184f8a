//! Ternary model packing.
//!
//! Weights are written tensor by tensor as data pairs. A tensor that is not
//! the last in its layer is closed by a level-2 run; the last tensor of a
//! layer is closed by a single level-3 run, which carries both the tensor
//! end (4 bits) and the layer end (2 bits). Runs of level 4 and up are read
//! as section ends and also close the current tensor and layer.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::codec::{Decoder, Encoder, Event, SchemeConfig, Trit, Variant};
use crate::container::{parse_file, write_model_file};
use crate::error::{Error, FormatError, Result};

pub const TENSOR_END_LEVEL: u64 = 2;
pub const LAYER_END_LEVEL: u64 = 3;

/// Boundary cost in bits.
pub const LAYER_BOUNDARY_BITS: u64 = 2;
pub const TENSOR_BOUNDARY_BITS: u64 = 4;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TensorSpec {
    pub name: String,
    pub elements: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerSpec {
    pub name: String,
    pub tensors: Vec<TensorSpec>,
}

/// Layer and tensor structure of a model, in storage order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelManifest {
    pub layers: Vec<LayerSpec>,
}

const LAYER_TENSORS: [&str; 7] = [
    "self_attn.q_proj",
    "self_attn.k_proj",
    "self_attn.v_proj",
    "self_attn.o_proj",
    "mlp.gate_proj",
    "mlp.up_proj",
    "mlp.down_proj",
];

impl ModelManifest {
    /// `layers` layers of `tensors_per_layer` tensors, each with `elements` weights.
    pub fn uniform(layers: usize, tensors_per_layer: usize, elements: u64) -> Self {
        ModelManifest {
            layers: (0..layers)
                .map(|l| LayerSpec {
                    name: format!("layer.{l}"),
                    tensors: (0..tensors_per_layer)
                        .map(|t| TensorSpec {
                            name: format!("tensor.{t}"),
                            elements,
                        })
                        .collect(),
                })
                .collect(),
        }
    }

    /// The BitNet b1.58 2B4T layout: 24 decoder layers of seven projections,
    /// with the token embedding in the first layer and the output head in the
    /// last (170 tensors). Every tensor gets `elements` weights.
    pub fn bitnet_2b4t(elements: u64) -> Self {
        let mut manifest = ModelManifest {
            layers: (0..24)
                .map(|l| LayerSpec {
                    name: format!("model.layers.{l}"),
                    tensors: LAYER_TENSORS
                        .iter()
                        .map(|name| TensorSpec {
                            name: name.to_string(),
                            elements,
                        })
                        .collect(),
                })
                .collect(),
        };
        manifest.layers[0].tensors.insert(
            0,
            TensorSpec {
                name: "embed_tokens".into(),
                elements,
            },
        );
        manifest.layers[23].tensors.push(TensorSpec {
            name: "lm_head".into(),
            elements,
        });
        manifest
    }

    pub fn layer_count(&self) -> usize {
        self.layers.len()
    }

    pub fn tensor_count(&self) -> usize {
        self.layers.iter().map(|l| l.tensors.len()).sum()
    }

    pub fn weight_count(&self) -> u64 {
        self.tensors().map(|t| t.elements).sum()
    }

    pub fn tensors(&self) -> impl Iterator<Item = &TensorSpec> {
        self.layers.iter().flat_map(|l| l.tensors.iter())
    }

    /// Names non-empty and unique per scope, no empty layers, no empty tensors.
    pub fn validate(&self) -> std::result::Result<(), String> {
        let mut layer_names = HashSet::new();
        for layer in &self.layers {
            if layer.name.is_empty() {
                return Err("empty layer name".into());
            }
            if !layer_names.insert(layer.name.as_str()) {
                return Err(format!("duplicate layer name `{}`", layer.name));
            }
            if layer.tensors.is_empty() {
                return Err(format!("layer `{}` has no tensors", layer.name));
            }
            let mut tensor_names = HashSet::new();
            for tensor in &layer.tensors {
                if tensor.name.is_empty() {
                    return Err(format!("empty tensor name in layer `{}`", layer.name));
                }
                if !tensor_names.insert(tensor.name.as_str()) {
                    return Err(format!("duplicate tensor `{}` in layer `{}`", tensor.name, layer.name));
                }
                if tensor.elements == 0 {
                    return Err(format!("tensor `{}.{}` has no elements", layer.name, tensor.name));
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Vec<u8> {
        serde_json::to_vec(self).expect("manifest serializes")
    }

    pub fn from_json(bytes: &[u8]) -> std::result::Result<Self, FormatError> {
        let manifest: ModelManifest =
            serde_json::from_slice(bytes).map_err(|e| FormatError::Manifest(e.to_string()))?;
        manifest.validate().map_err(FormatError::Manifest)?;
        Ok(manifest)
    }
}

/// Bits spent on boundaries: 2 per layer plus 4 per tensor.
pub fn boundary_overhead(manifest: &ModelManifest) -> u64 {
    LAYER_BOUNDARY_BITS * manifest.layer_count() as u64
        + TENSOR_BOUNDARY_BITS * manifest.tensor_count() as u64
}

/// Pair-level payload of a packed model, without the container.
pub fn encode_model_payload(
    manifest: &ModelManifest,
    weights: &[Trit],
    config: &SchemeConfig,
) -> Result<crate::pair::PairBuffer> {
    if config.variant != Variant::Single {
        return Err(Error::argument("model packing requires the single-delimiter variant"));
    }
    manifest.validate().map_err(Error::Argument)?;
    let expected = manifest.weight_count();
    if weights.len() as u64 != expected {
        return Err(Error::argument(format!(
            "manifest declares {expected} weights, got {}",
            weights.len()
        )));
    }
    let pairs = expected + 2 * manifest.tensor_count() as u64 + manifest.layer_count() as u64;
    let mut enc = Encoder::with_capacity(config, pairs as usize)?;
    let mut rest = weights;
    for layer in &manifest.layers {
        let last = layer.tensors.len() - 1;
        for (i, tensor) in layer.tensors.iter().enumerate() {
            let (head, tail) = rest.split_at(tensor.elements as usize);
            enc.push_trits(head);
            rest = tail;
            enc.push_boundary(if i == last { LAYER_END_LEVEL } else { TENSOR_END_LEVEL })?;
        }
    }
    Ok(enc.finish())
}

pub fn pack_model(manifest: &ModelManifest, weights: &[Trit], config: &SchemeConfig) -> Result<Vec<u8>> {
    let payload = encode_model_payload(manifest, weights, config)?;
    Ok(write_model_file(&payload, config, manifest))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnpackedModel {
    pub config: SchemeConfig,
    pub manifest: ModelManifest,
    pub weights: Vec<Trit>,
}

pub fn unpack_model(file: &[u8]) -> Result<UnpackedModel> {
    let parsed = parse_file(file)?;
    let manifest = parsed
        .manifest
        .ok_or_else(|| FormatError::Manifest("container has no model manifest".into()))?;
    let config = parsed.header.config;
    if config.variant != Variant::Single {
        return Err(Error::corruption("model payload declared as dual-starter"));
    }
    let weights = segment(&manifest, Decoder::new(&parsed.payload, &config))?;
    Ok(UnpackedModel {
        config,
        manifest,
        weights,
    })
}

/// Walks decoded events against the manifest, checking every tensor and
/// layer closes exactly where the manifest says it should.
fn segment(manifest: &ModelManifest, events: impl Iterator<Item = Event>) -> Result<Vec<Trit>> {
    let mut weights = Vec::with_capacity(manifest.weight_count() as usize);
    let mut layer = 0usize;
    let mut tensor = 0usize;
    let mut filled = 0u64;
    for event in events {
        let Some(spec) = manifest.layers.get(layer) else {
            return Err(Error::corruption(format!(
                "payload continues after the last of {} layers",
                manifest.layer_count()
            )));
        };
        let here = || format!("{}.{}", spec.name, spec.tensors[tensor].name);
        match event {
            Event::Data(t) => {
                weights.push(t);
                filled += 1;
            }
            Event::Boundary(level) => {
                let elements = spec.tensors[tensor].elements;
                if level < TENSOR_END_LEVEL {
                    return Err(Error::corruption(format!("level-{level} boundary inside `{}`", here())));
                }
                if filled != elements {
                    return Err(Error::corruption(format!(
                        "tensor `{}` closed after {filled} of {elements} weights",
                        here()
                    )));
                }
                let last = tensor + 1 == spec.tensors.len();
                match (level >= LAYER_END_LEVEL, last) {
                    (true, true) => {
                        layer += 1;
                        tensor = 0;
                    }
                    (false, false) => tensor += 1,
                    (true, false) => {
                        return Err(Error::corruption(format!(
                            "layer `{}` closed after {} of {} tensors",
                            spec.name,
                            tensor + 1,
                            spec.tensors.len()
                        )))
                    }
                    (false, true) => {
                        return Err(Error::corruption(format!("layer `{}` is never closed", spec.name)))
                    }
                }
                filled = 0;
            }
        }
    }
    if layer != manifest.layer_count() || filled != 0 {
        return Err(Error::corruption(format!(
            "payload ends inside layer {layer} of {}",
            manifest.layer_count()
        )));
    }
    Ok(weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::decode;
    use crate::container::{write_container, HEADER_LEN};
    use crate::pair::BitPair;
    use proptest::prelude::*;

    fn cfg() -> SchemeConfig {
        SchemeConfig::default()
    }

    #[test]
    fn overhead_formula() {
        let shape = ModelManifest::bitnet_2b4t(1);
        assert_eq!(shape.layer_count(), 24);
        assert_eq!(shape.tensor_count(), 170);
        assert_eq!(boundary_overhead(&shape), 728);
        assert_eq!(boundary_overhead(&ModelManifest::default()), 0);
        assert_eq!(boundary_overhead(&ModelManifest::uniform(1, 7, 1)), 30);
    }

    #[test]
    fn single_tensor_trace() {
        let manifest = ModelManifest::uniform(1, 1, 3);
        let weights = [Trit::Low, Trit::Mid, Trit::High];
        let payload = encode_model_payload(&manifest, &weights, &cfg()).unwrap();
        let pairs: Vec<_> = payload.iter().collect();
        assert_eq!(
            pairs,
            vec![BitPair::P00, BitPair::P01, BitPair::P10, BitPair::P11, BitPair::P11, BitPair::P11]
        );
        assert_eq!(
            decode(&payload, &cfg()),
            vec![Event::Data(Trit::Low), Event::Data(Trit::Mid), Event::Data(Trit::High), Event::Boundary(3)]
        );
        let file = pack_model(&manifest, &weights, &cfg()).unwrap();
        let back = unpack_model(&file).unwrap();
        assert_eq!(back.manifest, manifest);
        assert_eq!(back.weights, weights);
    }

    #[test]
    fn weight_count_mismatch() {
        let manifest = ModelManifest::uniform(1, 1, 3);
        assert!(matches!(pack_model(&manifest, &[Trit::Low], &cfg()), Err(Error::Argument(_))));
    }

    #[test]
    fn invalid_manifests_rejected() {
        let mut m = ModelManifest::uniform(2, 2, 1);
        m.layers[1].name = "layer.0".into();
        assert!(m.validate().is_err());
        let mut m = ModelManifest::uniform(1, 2, 1);
        m.layers[0].tensors[1].elements = 0;
        assert!(m.validate().is_err());
        let mut m = ModelManifest::uniform(1, 2, 1);
        m.layers[0].tensors[0].name.clear();
        assert!(m.validate().is_err());
        assert!(ModelManifest::uniform(1, 0, 1).validate().is_err());
        // the same tensor name in different layers is fine
        assert!(ModelManifest::uniform(3, 2, 1).validate().is_ok());
    }

    #[test]
    fn census_mismatch_is_corruption() {
        let manifest = ModelManifest::uniform(2, 2, 2);
        let weights = vec![Trit::Mid; 8];
        let good = encode_model_payload(&manifest, &weights, &cfg()).unwrap();
        // claim three weights in the first tensor instead of two
        let mut lying = manifest.clone();
        lying.layers[0].tensors[0].elements = 3;
        lying.layers[0].tensors[1].elements = 1;
        let file = write_model_file(&good, &cfg(), &lying);
        assert!(matches!(unpack_model(&file), Err(Error::Corruption(_))));

        // one layer fewer in the manifest
        let file = write_model_file(&good, &cfg(), &ModelManifest::uniform(1, 2, 2));
        assert!(matches!(unpack_model(&file), Err(Error::Corruption(_))));
    }

    #[test]
    fn bad_boundary_levels_are_corruption() {
        let manifest = ModelManifest::uniform(1, 2, 1);
        let run = |events: &[Event]| {
            let payload = crate::codec::encode(events, &cfg()).unwrap();
            unpack_model(&write_model_file(&payload, &cfg(), &manifest))
        };
        let d = Event::Data(Trit::Low);
        assert!(run(&[d, Event::Boundary(2), d, Event::Boundary(3)]).is_ok());
        assert!(run(&[d, Event::Boundary(2), d, Event::Boundary(5)]).is_ok());
        assert!(run(&[d, Event::Boundary(1), d, Event::Boundary(3)]).is_err());
        assert!(run(&[d, Event::Boundary(3), d, Event::Boundary(3)]).is_err());
        assert!(run(&[d, Event::Boundary(2), d, Event::Boundary(2)]).is_err());
        assert!(run(&[d, Event::Boundary(2), d]).is_err());
        assert!(run(&[d, Event::Boundary(2), d, Event::Boundary(3), d]).is_err());
    }

    #[test]
    fn plain_container_is_not_a_model() {
        let file = write_container(&crate::pair::PairBuffer::new(), &cfg(), None);
        assert!(matches!(unpack_model(&file), Err(Error::Format(FormatError::Manifest(_)))));
    }

    #[test]
    fn million_weights_cost_two_bits_each() {
        let manifest = ModelManifest::uniform(1, 1, 1_000_000);
        let weights: Vec<Trit> = (0..1_000_000u32).map(|i| Trit::ALL[(i % 3) as usize]).collect();
        let payload = encode_model_payload(&manifest, &weights, &cfg()).unwrap();
        // 3 pairs of boundary on top of 250,000 bytes of weights
        assert_eq!(payload.pair_count(), 1_000_003);
        let file = pack_model(&manifest, &weights, &cfg()).unwrap();
        let json = manifest.to_json().len();
        assert_eq!(file.len(), HEADER_LEN + 4 + json + 250_001);
    }

    fn arb_model() -> impl Strategy<Value = (ModelManifest, Vec<Trit>)> {
        prop::collection::vec(prop::collection::vec(1u64..50, 1..5), 1..5)
            .prop_flat_map(|shape| {
                let manifest = ModelManifest {
                    layers: shape
                        .iter()
                        .enumerate()
                        .map(|(l, ts)| LayerSpec {
                            name: format!("l{l}"),
                            tensors: ts
                                .iter()
                                .enumerate()
                                .map(|(t, &elements)| TensorSpec { name: format!("t{t}"), elements })
                                .collect(),
                        })
                        .collect(),
                };
                let n = manifest.weight_count() as usize;
                (Just(manifest), prop::collection::vec((0u8..3).prop_map(|r| Trit::from_rank(r).unwrap()), n))
            })
    }

    proptest! {
        #[test]
        fn pack_round_trip((manifest, weights) in arb_model(), d in 0u8..4) {
            let config = SchemeConfig::single(BitPair::from_bits(d), crate::codec::Mapping::Balanced);
            let payload = encode_model_payload(&manifest, &weights, &config).unwrap();
            prop_assert_eq!(
                payload.pair_count(),
                weights.len() as u64 + 2 * manifest.tensor_count() as u64 + manifest.layer_count() as u64
            );
            let back = unpack_model(&pack_model(&manifest, &weights, &config).unwrap()).unwrap();
            prop_assert_eq!(back.manifest, manifest);
            prop_assert_eq!(back.weights, weights);
            prop_assert_eq!(back.config, config);
        }
    }
}
