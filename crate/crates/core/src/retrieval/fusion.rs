/// Default weight of the concept channel in the geometric mean.
pub const DEFAULT_FUSION_WEIGHT: f64 = 6.0;

/// Stand-in for a missing channel. Under the `(x + 1) / 2` score maps this is
/// the image of zero similarity.
pub const NEUTRAL_SCORE: f64 = 0.5;

/// Per-channel scores in [0, 1]; `None` marks an unavailable channel.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ChannelScores {
    pub concept: Option<f64>,
    pub ocr: Option<f64>,
    pub asr: Option<f64>,
}

impl ChannelScores {
    pub fn new(concept: f64, ocr: f64, asr: f64) -> Self {
        Self {
            concept: Some(concept),
            ocr: Some(ocr),
            asr: Some(asr),
        }
    }
}

/// Weighted geometric mean focused on the concept channel:
/// `(p_c^w * sqrt(p_o * p_a))^(1 / (w + 1))`.
pub fn fuse(channels: &ChannelScores, w: f64) -> f64 {
    let p = |x: Option<f64>| x.unwrap_or(NEUTRAL_SCORE).clamp(0.0, 1.0);
    let (pc, po, pa) = (p(channels.concept), p(channels.ocr), p(channels.asr));
    let inner = pc.powf(w) * (po * pa).sqrt();
    inner.powf(1.0 / (w + 1.0)).clamp(0.0, 1.0)
}
