//! Arithmetic backends.
//!
//! Everything numeric in the crate is written once against [`Real`] and
//! instantiated twice: with `f64` for cheap screening and with [`Ext`]
//! (a 237-bit binary float) for every value that is reported or trusted.

use alloc::boxed::Box;
use alloc::vec::Vec;
use core::fmt::Debug;
use core::ops::{Add, Div, Mul, Neg, Sub};

use once_cell::race::OnceBox;

pub use f256::f256 as Ext;

/// Bernoulli terms `B_2k / (2k (2k-1))` of the Stirling series, 80 digits.
const STIRLING: [&str; 40] = [
    "8.3333333333333333333333333333333333333333333333333333333333333333333333333333333e-2",
    "-2.7777777777777777777777777777777777777777777777777777777777777777777777777777778e-3",
    "7.9365079365079365079365079365079365079365079365079365079365079365079365079365079e-4",
    "-5.952380952380952380952380952380952380952380952380952380952380952380952380952381e-4",
    "8.4175084175084175084175084175084175084175084175084175084175084175084175084175084e-4",
    "-1.9175269175269175269175269175269175269175269175269175269175269175269175269175269e-3",
    "6.4102564102564102564102564102564102564102564102564102564102564102564102564102564e-3",
    "-2.9550653594771241830065359477124183006535947712418300653594771241830065359477124e-2",
    "1.7964437236883057316493849001588939669435025472177174963552672531000704375317378e-1",
    "-1.3924322169059011164274322169059011164274322169059011164274322169059011164274322",
    "1.3402864044168391994478951000690131124913733609385783298826777087646652864044168e+1",
    "-1.56848284626002017306365132452088973828104262886871582523756436799915060784626e+2",
    "2.1931033333333333333333333333333333333333333333333333333333333333333333333333333e+3",
    "-3.6108771253724989357173265219242230736483610046828437633035334184759472115793955e+4",
    "6.9147226885131306710839525077567346755333407168779805042318946657100160993375676e+5",
    "-1.5238221539407416192283364958886780518659076533839342188488298545224541429475016e+7",
    "3.8290075139141414141414141414141414141414141414141414141414141414141414141414141e+8",
    "-1.0882266035784391089015149165525105374729434879810819660443720594096533946158006e+10",
    "3.4732028376500225225225225225225225225225225225225225225225225225225225225225225e+11",
    "-1.2369602142269274454251710349271324881080978641954251710349271324881080978641954e+13",
    "4.8878806479307933507581516251802290210847053890567382180703629532735763997412162e+14",
    "-2.1320333960919373896975058982136838557465453319851702055948769801145938658577688e+16",
    "1.0217752965257000775652876280535855003940110323089046493301812450748620961386919e+18",
    "-5.3575472173300203610827709191969204484849040543658816499867814010492358427277076e+19",
    "3.0615782637048834150431510513296227581941867656153370439084724799010513296227582e+21",
    "-1.8999917426399204050293714293069429029473424589961770871870760882969540017264768e+23",
    "1.2763374033828834149234951377697825976541633608829901448239746816377071259560502e+25",
    "-9.2528471761204163072302423483476227795193312434691745036572622779519331243469175e+26",
    "7.218822595185610297836050187301637922489840420259688769947467538903756566557637e+28",
    "-6.0451834059958569677431482387545472860661443959671962074063016080960133519536221e+30",
    "5.4206704715700945451934778148261000136612021857923497267759562841530054644808743e+32",
    "-5.1929578153140819467001947643918576846997062713974478680361033302209772798008092e+34",
    "5.303658855119700596654839243069758643699292635405549097956625536119371291337547e+36",
    "-5.7633253481649640138944358507809925551907375621890547263681592039800995024875622e+38",
    "6.6511557148484539375165201458105559510397393594549289589093630734781990140226515e+40",
    "-8.1373783581366805387161726320935756918406891649738792623679450044997330150208487e+42",
    "1.0536966953357141803754804927641810189648373375011415525114155251141552511415525e+45",
    "-1.4418180599962206261805377801511812809570332063664211111111111111111111111111111e+47",
    "2.0817356522089565462424808241263562311317343264149979189335880113456966983187598e+49",
    "-3.1670226634886661827413495567742561342918069830420753030391544616387069577051961e+51",
];

const HALF_LN_TWO_PI: &str =
    "0.9189385332046727417803297364056176398613974736377834128171515404827656959272604";

/// A real-number backend.
pub trait Real:
    Copy
    + Debug
    + PartialOrd
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// Unit roundoff of one correctly rounded operation.
    const UNIT: f64;
    /// Decimal digits carried.
    const DIGITS: u32;
    /// Relative accuracy of library transcendental calls, in units of `UNIT`.
    const ULPS: f64;
    /// Argument above which the Stirling series alone reaches full accuracy.
    const STIRLING_SHIFT: u32;

    fn from_f64(v: f64) -> Self;
    fn from_i128(v: i128) -> Self;
    fn to_f64(self) -> f64;
    fn parse(s: &str) -> Option<Self>;

    fn zero() -> Self {
        Self::from_i128(0)
    }
    fn one() -> Self {
        Self::from_i128(1)
    }
    fn pi() -> Self;

    fn abs(self) -> Self {
        if self < Self::zero() {
            -self
        } else {
            self
        }
    }
    fn is_finite(self) -> bool;
    fn floor(self) -> Self;

    fn sqrt(self) -> Self;
    fn cbrt(self) -> Self;
    fn exp(self) -> Self;
    fn exp_m1(self) -> Self;
    fn ln(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn tan(self) -> Self;
    fn asin(self) -> Self;
    fn acos(self) -> Self;
    fn atan(self) -> Self;
    fn sinh(self) -> Self;
    fn cosh(self) -> Self;
    fn tanh(self) -> Self;
    fn powi(self, n: i32) -> Self;
    fn powf(self, e: Self) -> Self;

    fn stirling() -> &'static [Self];
    fn half_ln_two_pi() -> Self;
}

impl Real for f64 {
    const UNIT: f64 = 1.1102230246251565e-16;
    const DIGITS: u32 = 15;
    const ULPS: f64 = 4.0;
    const STIRLING_SHIFT: u32 = 12;

    fn from_f64(v: f64) -> Self {
        v
    }
    fn from_i128(v: i128) -> Self {
        v as f64
    }
    fn to_f64(self) -> f64 {
        self
    }
    fn parse(s: &str) -> Option<Self> {
        s.parse().ok()
    }
    fn pi() -> Self {
        core::f64::consts::PI
    }
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
    fn floor(self) -> Self {
        libm::floor(self)
    }
    fn sqrt(self) -> Self {
        libm::sqrt(self)
    }
    fn cbrt(self) -> Self {
        libm::cbrt(self)
    }
    fn exp(self) -> Self {
        libm::exp(self)
    }
    fn exp_m1(self) -> Self {
        libm::expm1(self)
    }
    fn ln(self) -> Self {
        libm::log(self)
    }
    fn sin(self) -> Self {
        libm::sin(self)
    }
    fn cos(self) -> Self {
        libm::cos(self)
    }
    fn tan(self) -> Self {
        libm::tan(self)
    }
    fn asin(self) -> Self {
        libm::asin(self)
    }
    fn acos(self) -> Self {
        libm::acos(self)
    }
    fn atan(self) -> Self {
        libm::atan(self)
    }
    fn sinh(self) -> Self {
        libm::sinh(self)
    }
    fn cosh(self) -> Self {
        libm::cosh(self)
    }
    fn tanh(self) -> Self {
        libm::tanh(self)
    }
    fn powi(self, n: i32) -> Self {
        libm::pow(self, n as f64)
    }
    fn powf(self, e: Self) -> Self {
        libm::pow(self, e)
    }
    fn stirling() -> &'static [Self] {
        static TABLE: OnceBox<Vec<f64>> = OnceBox::new();
        TABLE.get_or_init(|| Box::new(STIRLING.iter().map(|s| s.parse().unwrap()).collect()))
    }
    fn half_ln_two_pi() -> Self {
        0.9189385332046728
    }
}

impl Real for Ext {
    const UNIT: f64 = 4.5e-72; // 2^-237, rounded up
    const DIGITS: u32 = 71;
    const ULPS: f64 = 64.0;
    const STIRLING_SHIFT: u32 = 50;

    fn from_f64(v: f64) -> Self {
        Ext::from(v)
    }
    fn from_i128(v: i128) -> Self {
        Ext::from(v)
    }
    fn to_f64(self) -> f64 {
        if !self.is_finite() {
            return if self.is_nan() {
                f64::NAN
            } else if self.is_sign_negative() {
                f64::NEG_INFINITY
            } else {
                f64::INFINITY
            };
        }
        let (s, t, (hi, lo)) = self.as_sign_exp_signif();
        if hi == 0 && lo == 0 {
            return 0.0;
        }
        // Keep the leading 64 bits so the final scaling rounds only once.
        let (top, shift) = if hi != 0 {
            let lz = hi.leading_zeros();
            let top = if lz >= 64 {
                (hi << (lz - 64)) | lo.checked_shr(192 - lz).unwrap_or(0)
            } else {
                hi >> (64 - lz)
            };
            (top as u64, 192 - lz as i32)
        } else {
            let lz = lo.leading_zeros();
            let top = if lz >= 64 { lo << (lz - 64) } else { lo >> (64 - lz) };
            (top as u64, 64 - lz as i32)
        };
        let v = libm::ldexp(top as f64, t + shift);
        if s == 1 {
            -v
        } else {
            v
        }
    }
    fn parse(s: &str) -> Option<Self> {
        s.parse().ok()
    }
    fn pi() -> Self {
        f256::consts::PI
    }
    fn is_finite(self) -> bool {
        Ext::is_finite(self)
    }
    fn floor(self) -> Self {
        Ext::floor(&self)
    }
    fn sqrt(self) -> Self {
        Ext::sqrt(self)
    }
    fn cbrt(self) -> Self {
        Ext::cbrt(self)
    }
    fn exp(self) -> Self {
        Ext::exp(&self)
    }
    fn exp_m1(self) -> Self {
        Ext::exp_m1(&self)
    }
    fn ln(self) -> Self {
        Ext::ln(&self)
    }
    fn sin(self) -> Self {
        Ext::sin(&self)
    }
    fn cos(self) -> Self {
        Ext::cos(&self)
    }
    fn tan(self) -> Self {
        Ext::tan(&self)
    }
    // The library routines lose accuracy close to |x| = 1; the half-angle
    // forms keep full precision there.
    fn asin(self) -> Self {
        let half = Ext::from(0.5);
        let a = Real::abs(self);
        if a <= half {
            return Ext::asin(&self);
        }
        let r = f256::consts::FRAC_PI_2 - Ext::asin(&Ext::sqrt((Ext::ONE - a) * half)).mul2();
        if self < Ext::ZERO {
            -r
        } else {
            r
        }
    }
    fn acos(self) -> Self {
        let half = Ext::from(0.5);
        if self > half {
            Ext::asin(&Ext::sqrt((Ext::ONE - self) * half)).mul2()
        } else if self < -half {
            f256::consts::PI - Ext::asin(&Ext::sqrt((Ext::ONE + self) * half)).mul2()
        } else {
            Ext::acos(&self)
        }
    }
    fn atan(self) -> Self {
        Ext::atan(&self)
    }
    fn sinh(self) -> Self {
        if Real::abs(self) < Ext::ONE {
            let m = Ext::exp_m1(&self);
            (m + m / (m + Ext::ONE)).div2()
        } else {
            let e = Ext::exp(&self);
            (e - Ext::ONE / e).div2()
        }
    }
    fn cosh(self) -> Self {
        let e = Ext::exp(&self);
        (e + Ext::ONE / e).div2()
    }
    fn tanh(self) -> Self {
        if Real::abs(self) > Ext::from(100) {
            return if self < Ext::ZERO { -Ext::ONE } else { Ext::ONE };
        }
        let m = Ext::exp_m1(&self.mul2());
        m / (m + Ext::TWO)
    }
    fn powi(self, n: i32) -> Self {
        Ext::powi(&self, n)
    }
    fn powf(self, e: Self) -> Self {
        Ext::powf(&self, &e)
    }
    fn stirling() -> &'static [Self] {
        static TABLE: OnceBox<Vec<Ext>> = OnceBox::new();
        TABLE.get_or_init(|| Box::new(STIRLING.iter().map(|s| s.parse().unwrap()).collect()))
    }
    fn half_ln_two_pi() -> Self {
        static V: OnceBox<Ext> = OnceBox::new();
        *V.get_or_init(|| Box::new(HALF_LN_TWO_PI.parse().unwrap()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ext_to_f64_roundtrips_doubles() {
        for v in [1.0, -2.5, 0.1, 1e-300, 6.02e23, core::f64::consts::PI, -7.0e-12] {
            assert_eq!(Ext::from_f64(v).to_f64(), v);
        }
        assert_eq!(Ext::ZERO.to_f64(), 0.0);
    }

    #[test]
    fn ext_to_f64_rounds_wide_values() {
        let third = Ext::ONE / Ext::from(3);
        assert!((third.to_f64() - 1.0 / 3.0).abs() <= f64::EPSILON / 4.0);
    }

    #[test]
    fn stirling_table_parses() {
        assert_eq!(<Ext as Real>::stirling().len(), 40);
        assert!((<f64 as Real>::stirling()[0] - 1.0 / 12.0).abs() < 1e-17);
    }
}
