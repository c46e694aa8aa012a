//! One augmentation step as the batch tools run it.
//!
//! Random draws happen in a fixed order on the sample's own stream: the
//! probability gate, then the target, then `lambda` and the crop. Keeping the
//! order in one place is what makes batch runs replayable.

use rand::Rng;

use crate::error::Result;
use crate::mixing::{MixAudit, Mixer};
use crate::sampler::{select_target, PairingStrategy, SampleRecord};
use crate::tensor::Tensor;

/// Augments `x1` (the tensor of `source`) against a target drawn from `pool`.
/// `load` fetches the chosen target's tensor.
pub fn augment_one<R, F>(
    mixer: &Mixer,
    source: &SampleRecord,
    x1: &Tensor,
    pool: &[SampleRecord],
    pairing: PairingStrategy,
    rng: &mut R,
    load: F,
) -> Result<(Tensor, MixAudit)>
where
    R: Rng + ?Sized,
    F: FnOnce(&SampleRecord) -> Result<Tensor>,
{
    if !mixer.gate(rng) {
        return Ok((x1.clone(), MixAudit::default()));
    }
    let target = select_target(source, pool, pairing, rng)?;
    let x2 = load(target)?;
    let draw = mixer.draw(x1.height(), x1.width(), rng);
    let (out, residue) = mixer.apply(x1, &x2, draw)?;
    Ok((
        out,
        MixAudit {
            applied: true,
            lambda: Some(draw.lambda),
            crop: Some(draw.crop),
            max_imag_residue: Some(residue),
            target_id: Some(target.id.clone()),
            ..MixAudit::default()
        },
    ))
}
