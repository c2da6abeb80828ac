//! Symmetric link distributions for binary exceedance models, plus the
//! standard-normal helpers used throughout the crate.

use crate::math;

const SQRT_2: f64 = core::f64::consts::SQRT_2;
const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * math::exp(-0.5 * x * x)
}

/// Standard normal distribution function, accurate in both tails.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * math::erfc(-x / SQRT_2)
}

/// Standard normal quantile function (Wichura's PPND16 rational
/// approximations; relative error below 1e-15 on (0, 1)).
pub fn normal_quantile(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "normal_quantile needs p in (0,1), got {p}");
    let q = p - 0.5;
    if math::abs(q) <= 0.425 {
        let r = 0.180625 - q * q;
        return q * poly7(r, &A) / poly7b(r, &B);
    }
    let mut r = if q < 0.0 { p } else { 1.0 - p };
    r = math::sqrt(-math::ln(r));
    let x = if r <= 5.0 {
        let r = r - 1.6;
        poly7(r, &C) / poly7b(r, &D)
    } else {
        let r = r - 5.0;
        poly7(r, &E) / poly7b(r, &F)
    };
    if q < 0.0 {
        -x
    } else {
        x
    }
}

fn poly7(r: f64, c: &[f64; 8]) -> f64 {
    (((((((c[7] * r + c[6]) * r + c[5]) * r + c[4]) * r + c[3]) * r + c[2]) * r + c[1]) * r) + c[0]
}

fn poly7b(r: f64, c: &[f64; 7]) -> f64 {
    (((((((c[6] * r + c[5]) * r + c[4]) * r + c[3]) * r + c[2]) * r + c[1]) * r + c[0]) * r) + 1.0
}

// rational-approximation tables, written at published precision
#[allow(clippy::excessive_precision)]
const A: [f64; 8] = [
    3.387_132_872_796_366_608e0,
    1.331_416_678_917_843_774_5e2,
    1.971_590_950_306_551_442_7e3,
    1.373_169_376_550_946_112_5e4,
    4.592_195_393_154_987_145_7e4,
    6.726_577_092_700_870_085_3e4,
    3.343_057_558_358_812_810_5e4,
    2.509_080_928_730_122_672_7e3,
];
#[allow(clippy::excessive_precision)]
const B: [f64; 7] = [
    4.231_333_070_160_091_125_2e1,
    6.871_870_074_920_579_083e2,
    5.394_196_021_424_751_107_7e3,
    2.121_379_430_158_659_586_7e4,
    3.930_789_580_009_271_061e4,
    2.872_908_573_572_194_267_4e4,
    5.226_495_278_852_854_561e3,
];
#[allow(clippy::excessive_precision)]
const C: [f64; 8] = [
    1.423_437_110_749_683_577_34e0,
    4.630_337_846_156_545_295_9e0,
    5.769_497_221_460_691_405_5e0,
    3.647_848_324_763_204_605_04e0,
    1.270_458_252_452_368_382_58e0,
    2.417_807_251_774_506_117_7e-1,
    2.272_384_498_926_918_458_33e-2,
    7.745_450_142_783_414_076_4e-4,
];
#[allow(clippy::excessive_precision)]
const D: [f64; 7] = [
    2.053_191_626_637_758_821_87e0,
    1.676_384_830_183_803_849_4e0,
    6.897_673_349_851_000_045_5e-1,
    1.481_039_764_274_800_745_9e-1,
    1.519_866_656_361_645_719_66e-2,
    5.475_938_084_995_344_946e-4,
    1.050_750_071_644_416_843_24e-9,
];
#[allow(clippy::excessive_precision)]
const E: [f64; 8] = [
    6.657_904_643_501_103_777_2e0,
    5.463_784_911_164_114_369_9e0,
    1.784_826_539_917_291_335_8e0,
    2.965_605_718_285_048_912_3e-1,
    2.653_218_952_657_612_309_3e-2,
    1.242_660_947_388_078_438_6e-3,
    2.711_555_568_743_487_578_15e-5,
    2.010_334_399_292_288_132_65e-7,
];
#[allow(clippy::excessive_precision)]
const F: [f64; 7] = [
    5.998_322_065_558_879_376_9e-1,
    1.369_298_809_227_358_053_1e-1,
    1.487_536_129_085_061_485_25e-2,
    7.868_691_311_456_132_591e-4,
    1.846_318_317_510_054_681_8e-5,
    1.421_511_758_316_445_888_7e-7,
    2.044_263_103_389_939_785_64e-15,
];

/// Symmetric distribution function driving a binary exceedance model.
///
/// Both links satisfy F(t) + F(-t) = 1 with F strictly increasing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Link {
    Logit,
    Probit,
}

impl Link {
    /// F(t).
    pub fn cdf(self, t: f64) -> f64 {
        match self {
            Link::Logit => {
                if t >= 0.0 {
                    1.0 / (1.0 + math::exp(-t))
                } else {
                    let e = math::exp(t);
                    e / (1.0 + e)
                }
            }
            Link::Probit => normal_cdf(t),
        }
    }

    /// Density f(t).
    pub fn pdf(self, t: f64) -> f64 {
        match self {
            Link::Logit => {
                let e = math::exp(-math::abs(t));
                e / ((1.0 + e) * (1.0 + e))
            }
            Link::Probit => normal_pdf(t),
        }
    }

    /// F^{-1}(p) for p in (0, 1).
    pub fn quantile(self, p: f64) -> f64 {
        assert!(p > 0.0 && p < 1.0, "link quantile needs p in (0,1), got {p}");
        match self {
            Link::Logit => math::ln(p / (1.0 - p)),
            Link::Probit => normal_quantile(p),
        }
    }

    /// log f(t), stable for large |t|.
    pub fn log_pdf(self, t: f64) -> f64 {
        match self {
            Link::Logit => -math::abs(t) - 2.0 * math::log1p(math::exp(-math::abs(t))),
            Link::Probit => -0.5 * t * t - 0.918_938_533_204_672_7,
        }
    }

    /// d/dt log f(t).
    pub fn log_pdf_deriv(self, t: f64) -> f64 {
        match self {
            Link::Logit => 1.0 - 2.0 * self.cdf(t),
            Link::Probit => -t,
        }
    }

    /// d^2/dt^2 log f(t); strictly negative for both links.
    pub fn log_pdf_second_deriv(self, t: f64) -> f64 {
        match self {
            Link::Logit => -2.0 * self.pdf(t),
            Link::Probit => -1.0,
        }
    }

    /// Variance of the link distribution (1 for probit, pi^2/3 for logit).
    pub fn noise_variance(self) -> f64 {
        match self {
            Link::Logit => core::f64::consts::PI * core::f64::consts::PI / 3.0,
            Link::Probit => 1.0,
        }
    }

    pub fn is_symmetric(self) -> bool {
        true
    }

    pub fn name(self) -> &'static str {
        match self {
            Link::Logit => "logit",
            Link::Probit => "probit",
        }
    }
}
