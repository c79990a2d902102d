use candle_core::{DType, Device, Tensor};

use super::TrainError;

/// Encoder input embeddings `[b, t, d]` with their `[b, t]` keep-mask.
#[derive(Debug, Clone)]
pub struct ModelInput {
    pub embeds: Tensor,
    pub mask: Tensor,
}

impl ModelInput {
    pub fn len(&self) -> usize {
        self.embeds.dims()[1]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn check(part: &str, embeds: &Tensor, mask: &Tensor) -> Result<(usize, usize, usize), TrainError> {
    let (b, t, d) = embeds
        .dims3()
        .map_err(|_| TrainError::Shape(format!("{part} embeddings must be [b, t, d], got {:?}", embeds.dims())))?;
    if mask.dims() != [b, t] {
        return Err(TrainError::Shape(format!(
            "{part} mask {:?} does not match embeddings {:?}",
            mask.dims(),
            embeds.dims()
        )));
    }
    Ok((b, t, d))
}

/// `prompt ⊕ soft keywords ⊕ source` along the sequence axis. The soft block
/// is optional (hard-prompt variants leave it out).
pub fn assemble_input(
    prompt: (&Tensor, &Tensor),
    soft: Option<(&Tensor, &Tensor)>,
    source: (&Tensor, &Tensor),
) -> Result<ModelInput, TrainError> {
    let mut parts = vec![("prompt", prompt)];
    if let Some(s) = soft {
        parts.push(("soft keyword", s));
    }
    parts.push(("source", source));
    let (b, _, d) = check(parts[0].0, parts[0].1 .0, parts[0].1 .1)?;
    for (name, (e, m)) in &parts[1..] {
        let (b2, _, d2) = check(name, e, m)?;
        if (b2, d2) != (b, d) {
            return Err(TrainError::Shape(format!(
                "{name} block is [{b2}, _, {d2}] but prompt is [{b}, _, {d}]"
            )));
        }
    }
    let embeds: Vec<&Tensor> = parts.iter().map(|(_, (e, _))| *e).collect();
    let masks: Vec<Tensor> = parts
        .iter()
        .map(|(_, (e, m))| m.to_dtype(e.dtype()))
        .collect::<candle_core::Result<_>>()?;
    Ok(ModelInput { embeds: Tensor::cat(&embeds, 1)?, mask: Tensor::cat(&masks, 1)? })
}

/// Right-pads token sequences to a common length (at least 1), returning
/// `[b, L]` ids and a `[b, L]` keep-mask of `dtype`.
pub fn pad_batch(seqs: &[&[u32]], pad: u32, dtype: DType, device: &Device) -> candle_core::Result<(Tensor, Tensor)> {
    let len = seqs.iter().map(|s| s.len()).max().unwrap_or(0).max(1);
    let mut ids = Vec::with_capacity(seqs.len() * len);
    let mut mask = Vec::with_capacity(seqs.len() * len);
    for s in seqs {
        ids.extend_from_slice(s);
        ids.extend(std::iter::repeat(pad).take(len - s.len()));
        mask.extend(std::iter::repeat(1f32).take(s.len()));
        mask.extend(std::iter::repeat(0f32).take(len - s.len()));
    }
    let ids = Tensor::from_vec(ids, (seqs.len(), len), device)?;
    let mask = Tensor::from_vec(mask, (seqs.len(), len), device)?.to_dtype(dtype)?;
    Ok((ids, mask))
}
