//! Term-by-term evaluation of both sides of every catalog identity.
//!
//! Every evaluation runs through a call-local [`Ctx`] which memoizes
//! `(argument, shift)` Pochhammer values, records the smallest theta factor
//! that ends up in a denominator and attaches the current summation index
//! to pole reports.

use std::collections::HashMap;

use super::instance::{Extent, IdentityInstance};
use super::{IdentityError, IdentityId, Param};
use crate::kernels::{box_indices, compositions_bounded, compositions_exact, IndexVector};
use crate::sum::CompensatedSum;
use crate::theta::{int_pow, pochhammer_parts, Nome, PochhammerParts, Scalar, ThetaError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvalOptions {
    /// Reuse `(argument, shift)` Pochhammer values within one evaluation.
    pub memoize: bool,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self { memoize: true }
    }
}

/// Value of one side together with its cancellation diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub value: Scalar,
    /// Largest `|term|` of the sum (for a closed product, `|value|`).
    pub max_abs_term: f64,
    /// Smallest modulus of any theta factor that was divided by.
    pub min_denominator: f64,
    pub terms: usize,
}

impl Evaluation {
    /// `max_abs_term / |value|`.
    pub fn condition_ratio(&self) -> f64 {
        let v = self.value.norm();
        if v > 0.0 {
            self.max_abs_term / v
        } else if self.max_abs_term == 0.0 {
            1.0
        } else {
            f64::INFINITY
        }
    }
}

/// `|lhs − rhs| / max(|lhs|, |rhs|, 1e−300)`.
pub fn relative_error(lhs: Scalar, rhs: Scalar) -> f64 {
    (lhs - rhs).norm() / lhs.norm().max(rhs.norm()).max(1e-300)
}

type Key = (u64, u64, i64, bool);

struct Ctx<'a> {
    nome: &'a Nome,
    cache: Option<HashMap<Key, PochhammerParts>>,
    min_den: f64,
    index: Vec<usize>,
}

type R<T> = Result<T, IdentityError>;

impl<'a> Ctx<'a> {
    fn new(nome: &'a Nome, opts: EvalOptions) -> Self {
        Self {
            nome,
            cache: opts.memoize.then(HashMap::new),
            min_den: f64::INFINITY,
            index: Vec::new(),
        }
    }

    fn q(&self) -> Scalar {
        self.nome.q
    }

    fn qp(&self, e: i64) -> Scalar {
        self.nome.q_pow(e)
    }

    fn parts(&mut self, label: &str, z: Scalar, k: i64, invert: bool) -> R<Scalar> {
        if k == 0 {
            return Ok(Scalar::new(1.0, 0.0));
        }
        let key = (z.re.to_bits(), z.im.to_bits(), k, invert);
        let cached = self.cache.as_ref().and_then(|c| c.get(&key).copied());
        let parts = match cached {
            Some(p) => p,
            None => {
                let p = pochhammer_parts(z, k, invert, self.nome).map_err(|e| match e {
                    ThetaError::Pole { index } => IdentityError::Pole {
                        index: self.index.clone(),
                        factor: format!("{label} (theta(q^{index} z) = 0, z = {z}, shift {k})"),
                    },
                    ThetaError::NonFinite => IdentityError::NonFinite {
                        index: self.index.clone(),
                    },
                    other => IdentityError::Theta(other),
                })?;
                if let Some(c) = self.cache.as_mut() {
                    c.insert(key, p);
                }
                p
            }
        };
        self.min_den = self.min_den.min(parts.min_denominator);
        Ok(parts.value)
    }

    /// `(z)_k`
    fn num(&mut self, label: &str, z: Scalar, k: i64) -> R<Scalar> {
        self.parts(label, z, k, false)
    }

    /// `1/(z)_k`
    fn den(&mut self, label: &str, z: Scalar, k: i64) -> R<Scalar> {
        self.parts(label, z, k, true)
    }

    fn nums(&mut self, label: &str, zs: &[Scalar], k: i64) -> R<Scalar> {
        let mut r = Scalar::new(1.0, 0.0);
        for &z in zs {
            r *= self.num(label, z, k)?;
        }
        Ok(r)
    }

    fn dens(&mut self, label: &str, zs: &[Scalar], k: i64) -> R<Scalar> {
        let mut r = Scalar::new(1.0, 0.0);
        for &z in zs {
            r *= self.den(label, z, k)?;
        }
        Ok(r)
    }

    /// `θ(a q^{2m}) / θ(a)`
    fn well_poised(&mut self, a: Scalar, m: i64) -> R<Scalar> {
        let top = self.num("theta(a q^2|x|)", a * self.qp(2 * m), 1)?;
        Ok(top * self.den("theta(a)", a, 1)?)
    }

    /// `Δ(zq^x)/Δ(z) = ∏_{i<j} q^{x_i} θ(q^{x_j−x_i} z_j/z_i)/θ(z_j/z_i)`
    fn delta(&mut self, z: &[Scalar], x: &[usize]) -> R<Scalar> {
        let mut r = Scalar::new(1.0, 0.0);
        for i in 0..z.len() {
            for j in i + 1..z.len() {
                let ratio = z[j] / z[i];
                let shift = x[j] as i64 - x[i] as i64;
                r *= self.qp(x[i] as i64)
                    * self.num("theta(q^(x_j-x_i) z_j/z_i)", self.qp(shift) * ratio, 1)?
                    * self.den("theta(z_j/z_i)", ratio, 1)?;
            }
        }
        Ok(r)
    }

    /// `∏_{i<j} (z_i z_j)_{x_i+x_j}`
    fn pair_product(&mut self, z: &[Scalar], x: &[usize]) -> R<Scalar> {
        let mut r = Scalar::new(1.0, 0.0);
        for i in 0..z.len() {
            for j in i + 1..z.len() {
                r *= self.num("(z_i z_j)_(x_i+x_j)", z[i] * z[j], (x[i] + x[j]) as i64)?;
            }
        }
        Ok(r)
    }

    /// `1 / ∏_{i,j} (q z_i/z_j)_{x_i}`
    fn inv_q_ratio_product(&mut self, z: &[Scalar], x: &[usize]) -> R<Scalar> {
        let q = self.q();
        let mut r = Scalar::new(1.0, 0.0);
        for i in 0..z.len() {
            for j in 0..z.len() {
                r *= self.den("(q z_i/z_j)_x_i", q * z[i] / z[j], x[i] as i64)?;
            }
        }
        Ok(r)
    }

    /// Shared prefix of the bounded Gustafson-Rakha-type summands:
    /// `Δ ∏_i θ(a z_i q^{|x|+x_i})/θ(a z_i) · ∏_{i<j}(z_i z_j)_{x_i+x_j} / ∏_i (aq/z_i)_{|x|−x_i}`.
    fn rc_prefix(&mut self, a: Scalar, z: &[Scalar], x: &[usize]) -> R<Scalar> {
        let total = x.iter().sum::<usize>() as i64;
        let q = self.q();
        let mut r = self.delta(z, x)?;
        for (i, &zi) in z.iter().enumerate() {
            let xi = x[i] as i64;
            r *= self.num("theta(a z_i q^(|x|+x_i))", a * zi * self.qp(total + xi), 1)?
                * self.den("theta(a z_i)", a * zi, 1)?
                * self.den("(aq/z_i)_(|x|-x_i)", a * q / zi, total - xi)?;
        }
        Ok(r * self.pair_product(z, x)?)
    }
}

fn finite(ctx: &Ctx, v: Scalar) -> R<Scalar> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(IdentityError::NonFinite {
            index: ctx.index.clone(),
        })
    }
}

/// Sums `term` over `indices` with compensated accumulation.
fn sum_terms<I, F>(ctx: &mut Ctx, indices: I, mut term: F) -> R<CompensatedSum>
where
    I: IntoIterator<Item = IndexVector>,
    F: FnMut(&mut Ctx, &[usize]) -> R<Scalar>,
{
    let mut acc = CompensatedSum::new();
    for x in indices {
        ctx.index = x.0;
        let t = term(ctx, &ctx.index.clone())?;
        acc.add(finite(ctx, t)?);
    }
    ctx.index.clear();
    Ok(acc)
}

fn scalar_range(order: usize) -> impl Iterator<Item = IndexVector> {
    (0..=order).map(|x| IndexVector(vec![x]))
}

fn sum_eval(ctx: &Ctx, prefactor: Scalar, acc: &CompensatedSum) -> R<Evaluation> {
    Ok(Evaluation {
        value: finite(ctx, prefactor * acc.value())?,
        max_abs_term: prefactor.norm() * acc.max_abs_term(),
        min_denominator: ctx.min_den,
        terms: acc.len(),
    })
}

fn product_eval(ctx: &Ctx, value: Scalar) -> R<Evaluation> {
    let value = finite(ctx, value)?;
    Ok(Evaluation {
        value,
        max_abs_term: value.norm(),
        min_denominator: ctx.min_den,
        terms: 1,
    })
}

/// Very-well-poised one-variable sum
/// `Σ_{x=0}^N θ(a q^{2x})/θ(a) (a, u_1, …, u_m, q^{−N})_x q^x / (q, aq/u_1, …, aq/u_m, aq^{N+1})_x`.
fn vwp_sum(ctx: &mut Ctx, a: Scalar, upper: &[Scalar], order: usize) -> R<CompensatedSum> {
    let q = ctx.q();
    let n = order as i64;
    let q_neg_n = ctx.qp(-n);
    let a_qn1 = a * ctx.qp(n + 1);
    sum_terms(ctx, scalar_range(order), |ctx, x| {
        let x = x[0] as i64;
        let mut t = ctx.well_poised(a, x)?
            * ctx.num("(a)_x", a, x)?
            * ctx.num("(q^-N)_x", q_neg_n, x)?
            * ctx.qp(x)
            * ctx.den("(q)_x", q, x)?
            * ctx.den("(aq^(N+1))_x", a_qn1, x)?;
        for &u in upper {
            t *= ctx.num("(u)_x", u, x)? * ctx.den("(aq/u)_x", a * q / u, x)?;
        }
        Ok(t)
    })
}

pub fn evaluate_lhs(instance: &IdentityInstance) -> Result<Evaluation, IdentityError> {
    evaluate_lhs_with(instance, EvalOptions::default())
}

pub fn evaluate_rhs(instance: &IdentityInstance) -> Result<Evaluation, IdentityError> {
    evaluate_rhs_with(instance, EvalOptions::default())
}

pub fn evaluate_lhs_with(
    instance: &IdentityInstance,
    opts: EvalOptions,
) -> Result<Evaluation, IdentityError> {
    let mut ctx = Ctx::new(&instance.nome, opts);
    let v = Vars::of(instance);
    let ctx = &mut ctx;
    match instance.id {
        IdentityId::FrenkelTuraev => {
            let acc = vwp_sum(ctx, v.a(), &[v.b(), v.c(), v.d(), v.e()], v.order)?;
            sum_eval(ctx, one(), &acc)
        }
        IdentityId::EllipticBailey => {
            let upper = [v.b(), v.c(), v.d(), v.e(), v.f(), v.g()];
            let acc = vwp_sum(ctx, v.a(), &upper, v.order)?;
            sum_eval(ctx, one(), &acc)
        }
        IdentityId::RsJackson => rs_lhs(ctx, &v),
        IdentityId::ThetaLemma => lemma_lhs(ctx, &v),
        IdentityId::GrSum => {
            let acc = sum_terms(ctx, compositions_exact(v.order, v.n()), |ctx, x| {
                gr_term(ctx, &v, x)
            })?;
            sum_eval(ctx, one(), &acc)
        }
        IdentityId::GrCorollary => gr_corollary_lhs(ctx, &v),
        IdentityId::BtTransform => bt_lhs(ctx, &v),
        IdentityId::BcTransform => bc_lhs(ctx, &v),
        IdentityId::NjcJackson => njc_lhs(ctx, &v),
        IdentityId::JtsJackson => jts_lhs(ctx, &v),
        IdentityId::GeneralJackson => general_lhs(ctx, &v),
    }
}

pub fn evaluate_rhs_with(
    instance: &IdentityInstance,
    opts: EvalOptions,
) -> Result<Evaluation, IdentityError> {
    let mut ctx = Ctx::new(&instance.nome, opts);
    let v = Vars::of(instance);
    let ctx = &mut ctx;
    match instance.id {
        IdentityId::FrenkelTuraev | IdentityId::GeneralJackson => jackson_product(ctx, &v),
        IdentityId::EllipticBailey => bailey_rhs(ctx, &v),
        IdentityId::RsJackson => rs_rhs(ctx, &v),
        IdentityId::ThetaLemma => lemma_rhs(ctx, &v),
        IdentityId::GrSum => gr_rhs(ctx, &v),
        IdentityId::GrCorollary => gr_corollary_rhs(ctx, &v),
        IdentityId::BtTransform => bt_rhs(ctx, &v),
        IdentityId::BcTransform => bc_rhs(ctx, &v),
        IdentityId::NjcJackson => njc_rhs(ctx, &v),
        IdentityId::JtsJackson => jts_rhs(ctx, &v),
    }
}

/// One summand of the Gustafson-Rakha sum at index `x` (with `|x| = N`).
pub fn gr_sum_term(instance: &IdentityInstance, x: &IndexVector) -> Result<Scalar, IdentityError> {
    if instance.id != IdentityId::GrSum || x.len() != instance.n() {
        return Err(IdentityError::Shape {
            id: instance.id,
            reason: "gr_sum_term needs a gr-sum instance and a matching index".into(),
        });
    }
    let mut ctx = Ctx::new(&instance.nome, EvalOptions { memoize: false });
    let v = Vars::of(instance);
    ctx.index = x.0.clone();
    gr_term(&mut ctx, &v, &x.0)
}

fn one() -> Scalar {
    Scalar::new(1.0, 0.0)
}

/// Flat view of an instance for the evaluators.
struct Vars<'a> {
    inst: &'a IdentityInstance,
    z: &'a [Scalar],
    zz: Scalar,
    q: Scalar,
    order: usize,
}

impl<'a> Vars<'a> {
    fn of(inst: &'a IdentityInstance) -> Self {
        Self {
            inst,
            z: inst.z.entries(),
            zz: inst.z_product,
            q: inst.nome.q,
            order: inst.order(),
        }
    }
    fn p(&self, p: Param) -> Scalar {
        self.inst.param(p)
    }
    fn a(&self) -> Scalar {
        self.p(Param::A)
    }
    fn b(&self) -> Scalar {
        self.p(Param::B)
    }
    fn c(&self) -> Scalar {
        self.p(Param::C)
    }
    fn d(&self) -> Scalar {
        self.p(Param::D)
    }
    fn e(&self) -> Scalar {
        self.p(Param::E)
    }
    fn f(&self) -> Scalar {
        self.p(Param::F)
    }
    fn g(&self) -> Scalar {
        self.p(Param::G)
    }
    fn bs(&self) -> [Scalar; 4] {
        [Param::B1, Param::B2, Param::B3, Param::B4].map(|p| self.p(p))
    }
    fn lambda(&self) -> Scalar {
        self.inst.lambda.expect("entry defines lambda")
    }
    fn n(&self) -> usize {
        self.z.len()
    }
    fn odd(&self) -> bool {
        self.n() % 2 == 1
    }
    fn big_n(&self) -> i64 {
        self.order as i64
    }
}

/// `(aq, aq/bc, aq/bd, aq/cd)_N / (aq/b, aq/c, aq/d, aq/bcd)_N`
fn jackson_product(ctx: &mut Ctx, v: &Vars) -> R<Evaluation> {
    let (a, b, c, d, q, n) = (v.a(), v.b(), v.c(), v.d(), v.q, v.big_n());
    let aq = a * q;
    let value = ctx.nums(
        "(aq, aq/bc, aq/bd, aq/cd)_N",
        &[aq, aq / (b * c), aq / (b * d), aq / (c * d)],
        n,
    )? * ctx.dens(
        "(aq/b, aq/c, aq/d, aq/bcd)_N",
        &[aq / b, aq / c, aq / d, aq / (b * c * d)],
        n,
    )?;
    product_eval(ctx, value)
}

fn bailey_rhs(ctx: &mut Ctx, v: &Vars) -> R<Evaluation> {
    let (a, b, c, d, e, f, g, q, n) = (
        v.a(),
        v.b(),
        v.c(),
        v.d(),
        v.e(),
        v.f(),
        v.g(),
        v.q,
        v.big_n(),
    );
    let lam = v.lambda();
    let pre = ctx.nums(
        "(aq, aq/ef, lq/e, lq/f)_N",
        &[a * q, a * q / (e * f), lam * q / e, lam * q / f],
        n,
    )? * ctx.dens(
        "(lq, lq/ef, aq/e, aq/f)_N",
        &[lam * q, lam * q / (e * f), a * q / e, a * q / f],
        n,
    )?;
    let upper = [lam * b / a, lam * c / a, lam * d / a, e, f, g];
    let acc = vwp_sum(ctx, lam, &upper, v.order)?;
    sum_eval(ctx, pre, &acc)
}

fn rs_limits(v: &Vars) -> IndexVector {
    match &v.inst.extent {
        Extent::Box(limits) => limits.clone(),
        _ => unreachable!("rs-jackson instances carry box limits"),
    }
}

fn rs_lhs(ctx: &mut Ctx, v: &Vars) -> R<Evaluation> {
    let (a, b, c, d, e, q) = (v.a(), v.b(), v.c(), v.d(), v.e(), v.q);
    let limits = rs_limits(v);
    let nn = limits.total() as i64;
    let z = v.z;
    let acc = sum_terms(ctx, box_indices(&limits), |ctx, x| {
        let total = x.iter().sum::<usize>() as i64;
        let mut t = ctx.delta(z, x)?
            * ctx.well_poised(a, total)?
            * ctx.nums("(a, b, c)_|x|", &[a, b, c], total)?
            * ctx.dens(
                "(aq/b, aq/c, aq^(|N|+1))_|x|",
                &[a * q / b, a * q / c, a * ctx.qp(nn + 1)],
                total,
            )?
            * ctx.qp(total);
        for (i, &zi) in z.iter().enumerate() {
            let xi = x[i] as i64;
            let ni = limits[i] as i64;
            t *= ctx.num("(d/z_i)_|x|", d / zi, total)?
                * ctx.den(
                    "(aq^(|N|+1-N_i)/e z_i)_|x|",
                    a * ctx.qp(nn + 1 - ni) / (e * zi),
                    total,
                )?
                * ctx.num(
                    "(aq^(|N|+1)/e z_i)_(|x|-x_i)",
                    a * ctx.qp(nn + 1) / (e * zi),
                    total - xi,
                )?
                * ctx.num("(e z_i)_x_i", e * zi, xi)?
                * ctx.den("(d/z_i)_(|x|-x_i)", d / zi, total - xi)?
                * ctx.den("(aq z_i/d)_x_i", a * q * zi / d, xi)?;
            for (j, &zj) in z.iter().enumerate() {
                t *= ctx.num(
                    "(q^-N_j z_i/z_j)_x_i",
                    ctx.qp(-(limits[j] as i64)) * zi / zj,
                    xi,
                )?;
            }
        }
        Ok(t * ctx.inv_q_ratio_product(z, x)?)
    })?;
    sum_eval(ctx, one(), &acc)
}

fn rs_rhs(ctx: &mut Ctx, v: &Vars) -> R<Evaluation> {
    let (a, b, c, d, q) = (v.a(), v.b(), v.c(), v.d(), v.q);
    let limits = rs_limits(v);
    let nn = limits.total() as i64;
    let aq = a * q;
    let mut value = ctx.nums("(aq, aq/bc)_|N|", &[aq, aq / (b * c)], nn)?
        * ctx.dens("(aq/b, aq/c)_|N|", &[aq / b, aq / c], nn)?;
    for (i, &zi) in v.z.iter().enumerate() {
        let ni = limits[i] as i64;
        value *= ctx.nums(
            "(aq z_i/bd, aq z_i/cd)_N_i",
            &[aq * zi / (b * d), aq * zi / (c * d)],
            ni,
        )? * ctx.dens(
            "(aq z_i/d, aq z_i/bcd)_N_i",
            &[aq * zi / d, aq * zi / (b * c * d)],
            ni,
        )?;
    }
    product_eval(ctx, value)
}

fn lemma_lhs(ctx: &mut Ctx, v: &Vars) -> R<Evaluation> {
    let z = v.z;
    let bs = v.bs();
    let acc = sum_terms(ctx, compositions_exact(1, v.n()), |ctx, x| {
        let k = x.iter().position(|&xi| xi == 1).expect("unit index");
        let zk = z[k];
        let mut t = one() / zk;
        for &b in &bs {
            t *= ctx.num("theta(z_k b_j)", zk * b, 1)?;
        }
        for (j, &zj) in z.iter().enumerate() {
            if j != k {
                t *= ctx.num("theta(z_k z_j)", zk * zj, 1)?
                    * ctx.den("theta(z_k/z_j)", zk / zj, 1)?;
            }
        }
        Ok(t)
    })?;
    sum_eval(ctx, one(), &acc)
}

fn lemma_rhs(ctx: &mut Ctx, v: &Vars) -> R<Evaluation> {
    let zz = v.zz;
    let [b1, b2, b3, b4] = v.bs();
    let value = if v.odd() {
        ctx.nums("theta(Z b_j)", &[zz * b1, zz * b2, zz * b3, zz * b4], 1)? / zz
    } else {
        ctx.nums(
            "theta(Z, Z b1 b_j)",
            &[zz, zz * b1 * b2, zz * b1 * b3, zz * b1 * b4],
            1,
        )? / (zz * b1)
    };
    product_eval(ctx, value)
}

fn gr_term(ctx: &mut Ctx, v: &Vars, x: &[usize]) -> R<Scalar> {
    let z = v.z;
    let bs = v.bs();
    let mut cross = 0i64;
    for i in 0..z.len() {
        for j in i + 1..z.len() {
            cross += (x[i] * x[j]) as i64;
        }
    }
    let mut t = ctx.delta(z, x)? * ctx.qp(cross) * ctx.pair_product(z, x)?;
    for (i, &zi) in z.iter().enumerate() {
        let xi = x[i] as i64;
        for &b in &bs {
            t *= ctx.num("(z_i b_j)_x_i", zi * b, xi)?;
        }
        t *= int_pow(zi, -xi);
    }
    Ok(t * ctx.inv_q_ratio_product(z, x)?)
}

fn gr_rhs(ctx: &mut Ctx, v: &Vars) -> R<Evaluation> {
    let zz = v.zz;
    let n = v.big_n();
    let [b1, b2, b3, b4] = v.bs();
    let qn = ctx.den("(q)_N", v.q, n)?;
    let value = if v.odd() {
        ctx.nums("(Z b_j)_N", &[zz * b1, zz * b2, zz * b3, zz * b4], n)? * int_pow(zz, -n) * qn
    } else {
        ctx.nums(
            "(Z, Z b1 b_j)_N",
            &[zz, zz * b1 * b2, zz * b1 * b3, zz * b1 * b4],
            n,
        )? * int_pow(zz * b1, -n)
            * qn
    };
    product_eval(ctx, value)
}

fn gr_corollary_lhs(ctx: &mut Ctx, v: &Vars) -> R<Evaluation> {
    let (a, q, z) = (v.a(), v.q, v.z);
    let bs = v.bs();
    let n = v.big_n();
    let q_neg_n = ctx.qp(-n);
    let a_qn1 = a * ctx.qp(n + 1);
    let acc = sum_terms(ctx, compositions_bounded(v.order, v.n()), |ctx, x| {
        let total = x.iter().sum::<usize>() as i64;
        let mut t = ctx.rc_prefix(a, z, x)?
            * ctx.num("(q^-N)_|x|", q_neg_n, total)?
            * ctx.dens("(aq/b_j)_|x|", &bs.map(|b| a * q / b), total)?
            * ctx.qp(total);
        for (i, &zi) in z.iter().enumerate() {
            let xi = x[i] as i64;
            t *= ctx.num("(a z_i)_|x|", a * zi, total)?
                * ctx.nums("(z_i b_j)_x_i", &bs.map(|b| zi * b), xi)?
                * ctx.den("(aq^(N+1) z_i)_x_i", a_qn1 * zi, xi)?;
        }
        Ok(t * ctx.inv_q_ratio_product(z, x)?)
    })?;
    sum_eval(ctx, one(), &acc)
}

fn gr_corollary_rhs(ctx: &mut Ctx, v: &Vars) -> R<Evaluation> {
    let (a, q, zz, n) = (v.a(), v.q, v.zz, v.big_n());
    let [b1, b2, b3, _] = v.bs();
    let aq = a * q;
    let mut value = ctx.dens(
        "(aq/b1, aq/b2, aq/b3, aq/b1b2b3Z^2)_N",
        &[aq / b1, aq / b2, aq / b3, aq / (b1 * b2 * b3 * zz * zz)],
        n,
    )?;
    for &zj in v.z {
        value *= ctx.num("(aq z_j)_N", aq * zj, n)? * ctx.den("(aq/z_j)_N", aq / zj, n)?;
    }
    value *= if v.odd() {
        ctx.nums(
            "(aq/Z, aq/b1b2Z, aq/b1b3Z, aq/b2b3Z)_N",
            &[
                aq / zz,
                aq / (b1 * b2 * zz),
                aq / (b1 * b3 * zz),
                aq / (b2 * b3 * zz),
            ],
            n,
        )?
    } else {
        ctx.nums(
            "(aq/b1Z, aq/b2Z, aq/b3Z, aq/b1b2b3Z)_N",
            &[
                aq / (b1 * zz),
                aq / (b2 * zz),
                aq / (b3 * zz),
                aq / (b1 * b2 * b3 * zz),
            ],
            n,
        )?
    };
    product_eval(ctx, value)
}

fn bt_lhs(ctx: &mut Ctx, v: &Vars) -> R<Evaluation> {
    let (a, b, c, d, e, f, g, q, z) = (v.a(), v.b(), v.c(), v.d(), v.e(), v.f(), v.g(), v.q, v.z);
    let n = v.big_n();
    let q_neg_n = ctx.qp(-n);
    let a_qn1 = a * ctx.qp(n + 1);
    let aq = a * q;
    let acc = sum_terms(ctx, compositions_bounded(v.order, v.n()), |ctx, x| {
        let total = x.iter().sum::<usize>() as i64;
        let mut t = ctx.rc_prefix(a, z, x)?
            * ctx.nums("(q^-N, b)_|x|", &[q_neg_n, b], total)?
            * ctx.dens(
                "(aq/c, aq/d, aq/e, aq/f, aq/g)_|x|",
                &[aq / c, aq / d, aq / e, aq / f, aq / g],
                total,
            )?
            * ctx.qp(total);
        for (i, &zi) in z.iter().enumerate() {
            let xi = x[i] as i64;
            t *= ctx.num("(a z_i)_|x|", a * zi, total)?
                * ctx.nums(
                    "(c z_i, d z_i, e z_i, f z_i, g z_i)_x_i",
                    &[c * zi, d * zi, e * zi, f * zi, g * zi],
                    xi,
                )?
                * ctx.dens(
                    "(aq^(N+1) z_i, aq z_i/b)_x_i",
                    &[a_qn1 * zi, aq * zi / b],
                    xi,
                )?;
        }
        Ok(t * ctx.inv_q_ratio_product(z, x)?)
    })?;
    sum_eval(ctx, one(), &acc)
}

fn bt_rhs(ctx: &mut Ctx, v: &Vars) -> R<Evaluation> {
    let (a, b, c, d, e, f, g, q, z, zz) = (
        v.a(),
        v.b(),
        v.c(),
        v.d(),
        v.e(),
        v.f(),
        v.g(),
        v.q,
        v.z,
        v.zz,
    );
    let lam = v.lambda();
    let n = v.big_n();
    let aq = a * q;
    let lq = lam * q;
    let mut pre =
        int_pow(zz, n) * ctx.dens("(lq, aq/e, aq/f, aq/g)_N", &[lq, aq / e, aq / f, aq / g], n)?;
    for &zi in z {
        pre *= ctx.num("(aq z_i)_N", aq * zi, n)? * ctx.den("(aq/z_i)_N", aq / zi, n)?;
    }
    let (parity_top, parity_bottom) = if v.odd() {
        pre *= int_pow(a / lam, n)
            * ctx.nums(
                "(aq/Z, lq/eZ, lq/fZ, lq/gZ)_N",
                &[aq / zz, lq / (e * zz), lq / (f * zz), lq / (g * zz)],
                n,
            )?;
        (
            "odd",
            [
                ctx.qp(-n) * zz / a,
                lq / (e * zz),
                lq / (f * zz),
                lq / (g * zz),
            ],
        )
    } else {
        pre *= ctx.nums(
            "(lq/Z, aq/eZ, aq/fZ, aq/gZ)_N",
            &[lq / zz, aq / (e * zz), aq / (f * zz), aq / (g * zz)],
            n,
        )?;
        (
            "even",
            [
                lq / zz,
                lq / (e * f * zz),
                lq / (e * g * zz),
                lq / (f * g * zz),
            ],
        )
    };
    let q_neg_n = ctx.qp(-n);
    let l_qn1 = lam * ctx.qp(n + 1);
    let acc = sum_terms(ctx, compositions_bounded(v.order, v.n()), |ctx, x| {
        let total = x.iter().sum::<usize>() as i64;
        let mut t = ctx.delta(z, x)?
            * ctx.well_poised(lam, total)?
            * ctx.pair_product(z, x)?
            * ctx.nums(
                "(l, q^-N, lc/a, ld/a)_|x|",
                &[lam, q_neg_n, lam * c / a, lam * d / a],
                total,
            )?
            * ctx.dens(
                "(lq^(N+1), aq/c, aq/d)_|x|",
                &[l_qn1, aq / c, aq / d],
                total,
            )?
            * ctx.dens(parity_top, &parity_bottom, total)?
            * ctx.qp(total);
        for (i, &zi) in z.iter().enumerate() {
            let xi = x[i] as i64;
            let lb = lam * b / (a * zi);
            t *= ctx.num("(lb/a z_i)_|x|", lb, total)?
                * ctx.den("(lb/a z_i)_(|x|-x_i)", lb, total - xi)?
                * ctx.nums(
                    "(e z_i, f z_i, g z_i, q^-N z_i/a)_x_i",
                    &[e * zi, f * zi, g * zi, q_neg_n * zi / a],
                    xi,
                )?
                * ctx.den("(aq z_i/b)_x_i", aq * zi / b, xi)?;
        }
        Ok(t * ctx.inv_q_ratio_product(z, x)?)
    })?;
    sum_eval(ctx, pre, &acc)
}

fn bc_lhs(ctx: &mut Ctx, v: &Vars) -> R<Evaluation> {
    let (a, b, c, d, e, f, g, q, z, zz) = (
        v.a(),
        v.b(),
        v.c(),
        v.d(),
        v.e(),
        v.f(),
        v.g(),
        v.q,
        v.z,
        v.zz,
    );
    let n = v.big_n();
    let aq = a * q;
    let q_neg_n = ctx.qp(-n);
    let a_qn1 = a * ctx.qp(n + 1);
    let efg_z2 = e * f * g * zz * zz;
    let parity = if v.odd() {
        [
            aq / (e * zz),
            aq / (f * zz),
            aq / (g * zz),
            aq / (e * f * g * zz),
        ]
    } else {
        [
            aq / zz,
            aq / (e * f * zz),
            aq / (e * g * zz),
            aq / (f * g * zz),
        ]
    };
    let acc = sum_terms(ctx, compositions_bounded(v.order, v.n()), |ctx, x| {
        let total = x.iter().sum::<usize>() as i64;
        let mut t = ctx.delta(z, x)?
            * ctx.well_poised(a, total)?
            * ctx.pair_product(z, x)?
            * ctx.nums("(a, q^-N, c, d)_|x|", &[a, q_neg_n, c, d], total)?
            * ctx.dens(
                "(aq^(N+1), aq/c, aq/d)_|x|",
                &[a_qn1, aq / c, aq / d],
                total,
            )?
            * ctx.dens("parity factor", &parity, total)?
            * ctx.qp(total);
        for (i, &zi) in z.iter().enumerate() {
            let xi = x[i] as i64;
            t *= ctx.num("(b/z_i)_|x|", b / zi, total)?
                * ctx.den("(b/z_i)_(|x|-x_i)", b / zi, total - xi)?
                * ctx.nums(
                    "(e z_i, f z_i, g z_i, aq z_i/efgZ^2)_x_i",
                    &[e * zi, f * zi, g * zi, aq * zi / efg_z2],
                    xi,
                )?
                * ctx.den("(aq z_i/b)_x_i", aq * zi / b, xi)?;
        }
        Ok(t * ctx.inv_q_ratio_product(z, x)?)
    })?;
    sum_eval(ctx, one(), &acc)
}

fn bc_rhs(ctx: &mut Ctx, v: &Vars) -> R<Evaluation> {
    let (a, b, c, d, e, f, g, q, z, zz) = (
        v.a(),
        v.b(),
        v.c(),
        v.d(),
        v.e(),
        v.f(),
        v.g(),
        v.q,
        v.z,
        v.zz,
    );
    let lam = v.lambda();
    let n = v.big_n();
    let aq = a * q;
    let lq = lam * q;
    let mut pre =
        ctx.nums("(aq, lq/c)_N", &[aq, lq / c], n)? * ctx.dens("(lq, aq/c)_N", &[lq, aq / c], n)?;
    let parity = if v.odd() {
        pre *= ctx.nums("(aq/cfZ, lq/fZ)_N", &[aq / (c * f * zz), lq / (f * zz)], n)?
            * ctx.dens("(aq/fZ, lq/cfZ)_N", &[aq / (f * zz), lq / (c * f * zz)], n)?;
        [
            aq / (e * zz),
            lq / (f * zz),
            lq / (g * zz),
            aq / (e * f * g * zz),
        ]
    } else {
        pre *= ctx.nums("(aq/cZ, lq/Z)_N", &[aq / (c * zz), lq / zz], n)?
            * ctx.dens("(aq/Z, lq/cZ)_N", &[aq / zz, lq / (c * zz)], n)?;
        [
            lq / zz,
            aq / (e * f * zz),
            aq / (e * g * zz),
            lq / (f * g * zz),
        ]
    };
    let q_neg_n = ctx.qp(-n);
    let l_qn1 = lam * ctx.qp(n + 1);
    let efg_z2 = e * f * g * zz * zz;
    let acc = sum_terms(ctx, compositions_bounded(v.order, v.n()), |ctx, x| {
        let total = x.iter().sum::<usize>() as i64;
        let mut t = ctx.delta(z, x)?
            * ctx.well_poised(lam, total)?
            * ctx.pair_product(z, x)?
            * ctx.nums(
                "(l, q^-N, c, ld/a)_|x|",
                &[lam, q_neg_n, c, lam * d / a],
                total,
            )?
            * ctx.dens(
                "(lq^(N+1), lq/c, aq/d)_|x|",
                &[l_qn1, lq / c, aq / d],
                total,
            )?
            * ctx.dens("parity factor", &parity, total)?
            * ctx.qp(total);
        for (i, &zi) in z.iter().enumerate() {
            let xi = x[i] as i64;
            let lb = lam * b / (a * zi);
            t *= ctx.num("(lb/a z_i)_|x|", lb, total)?
                * ctx.den("(lb/a z_i)_(|x|-x_i)", lb, total - xi)?
                * ctx.nums(
                    "(le z_i/a, f z_i, g z_i, aq z_i/efgZ^2)_x_i",
                    &[lam * e * zi / a, f * zi, g * zi, aq * zi / efg_z2],
                    xi,
                )?
                * ctx.den("(aq z_i/b)_x_i", aq * zi / b, xi)?;
        }
        Ok(t * ctx.inv_q_ratio_product(z, x)?)
    })?;
    sum_eval(ctx, pre, &acc)
}

fn njc_lhs(ctx: &mut Ctx, v: &Vars) -> R<Evaluation> {
    let (a, b, c, d, e, q, z, zz) = (v.a(), v.b(), v.c(), v.d(), v.e(), v.q, v.z, v.zz);
    let n = v.big_n();
    let aq = a * q;
    let q_neg_n = ctx.qp(-n);
    let a_qn1 = a * ctx.qp(n + 1);
    let parity = if v.odd() {
        [
            q_neg_n * e * zz / a,
            aq / (b * zz),
            aq / (c * zz),
            aq / (d * zz),
        ]
    } else {
        [
            aq / zz,
            aq / (b * c * zz),
            aq / (b * d * zz),
            aq / (c * d * zz),
        ]
    };
    let acc = sum_terms(ctx, compositions_bounded(v.order, v.n()), |ctx, x| {
        let total = x.iter().sum::<usize>() as i64;
        let mut t = ctx.delta(z, x)?
            * ctx.well_poised(a, total)?
            * ctx.pair_product(z, x)?
            * ctx.nums("(a, q^-N)_|x|", &[a, q_neg_n], total)?
            * ctx.den("(aq^(N+1))_|x|", a_qn1, total)?
            * ctx.dens("parity factor", &parity, total)?
            * ctx.qp(total);
        for (i, &zi) in z.iter().enumerate() {
            let xi = x[i] as i64;
            t *= ctx.num("(e/z_i)_|x|", e / zi, total)?
                * ctx.den("(e/z_i)_(|x|-x_i)", e / zi, total - xi)?
                * ctx.nums(
                    "(b z_i, c z_i, d z_i, q^-N e z_i/a)_x_i",
                    &[b * zi, c * zi, d * zi, q_neg_n * e * zi / a],
                    xi,
                )?
                * ctx.den("(aq z_i/e)_x_i", aq * zi / e, xi)?;
        }
        Ok(t * ctx.inv_q_ratio_product(z, x)?)
    })?;
    sum_eval(ctx, one(), &acc)
}

fn njc_rhs(ctx: &mut Ctx, v: &Vars) -> R<Evaluation> {
    let (a, b, c, d, e, q, zz) = (v.a(), v.b(), v.c(), v.d(), v.e(), v.q, v.zz);
    let n = v.big_n();
    let aq = a * q;
    let mut value = ctx.nums(
        "(aq, aq/be, aq/ce, aq/de)_N",
        &[aq, aq / (b * e), aq / (c * e), aq / (d * e)],
        n,
    )? * int_pow(zz, -n);
    for &zi in v.z {
        value *=
            ctx.num("(aq/e z_i)_N", aq / (e * zi), n)? * ctx.den("(aq z_i/e)_N", aq * zi / e, n)?;
    }
    value *= if v.odd() {
        int_pow(e, n)
            * ctx.dens(
                "(aq/bZ, aq/cZ, aq/dZ, aq/eZ)_N",
                &[aq / (b * zz), aq / (c * zz), aq / (d * zz), aq / (e * zz)],
                n,
            )?
    } else {
        ctx.dens(
            "(aq/Z, aq/beZ, aq/ceZ, aq/deZ)_N",
            &[
                aq / zz,
                aq / (b * e * zz),
                aq / (c * e * zz),
                aq / (d * e * zz),
            ],
            n,
        )?
    };
    product_eval(ctx, value)
}

fn jts_lhs(ctx: &mut Ctx, v: &Vars) -> R<Evaluation> {
    let (a, b, c, d, e, q, z, zz) = (v.a(), v.b(), v.c(), v.d(), v.e(), v.q, v.z, v.zz);
    let t = v.p(Param::T);
    let n = v.big_n();
    let aq = a * q;
    let q_neg_n = ctx.qp(-n);
    let a_qn1 = a * ctx.qp(n + 1);
    let de_z2 = d * e * zz * zz;
    let parity = if v.odd() {
        [aq / (d * zz), aq / (e * zz), t / zz, t / (d * e * zz)]
    } else {
        [aq / zz, aq / (d * e * zz), t / (d * zz), t / (e * zz)]
    };
    let acc = sum_terms(ctx, compositions_bounded(v.order, v.n()), |ctx, x| {
        let total = x.iter().sum::<usize>() as i64;
        let mut term = ctx.delta(z, x)?
            * ctx.well_poised(a, total)?
            * ctx.pair_product(z, x)?
            * ctx.nums("(a, q^-N, b, c)_|x|", &[a, q_neg_n, b, c], total)?
            * ctx.dens(
                "(aq^(N+1), aq/b, aq/c)_|x|",
                &[a_qn1, aq / b, aq / c],
                total,
            )?
            * ctx.dens("parity factor", &parity, total)?
            * ctx.qp(total);
        for (i, &zi) in z.iter().enumerate() {
            let xi = x[i] as i64;
            term *= ctx.num("(t/z_i)_|x|", t / zi, total)?
                * ctx.den("(t/z_i)_(|x|-x_i)", t / zi, total - xi)?
                * ctx.nums(
                    "(d z_i, e z_i, t z_i/deZ^2)_x_i",
                    &[d * zi, e * zi, t * zi / de_z2],
                    xi,
                )?;
        }
        Ok(term * ctx.inv_q_ratio_product(z, x)?)
    })?;
    sum_eval(ctx, one(), &acc)
}

fn jts_rhs(ctx: &mut Ctx, v: &Vars) -> R<Evaluation> {
    let (a, b, c, d, q, zz) = (v.a(), v.b(), v.c(), v.d(), v.q, v.zz);
    let n = v.big_n();
    let aq = a * q;
    let value = if v.odd() {
        ctx.nums(
            "(aq, aq/bc, aq/bdZ, aq/cdZ)_N",
            &[aq, aq / (b * c), aq / (b * d * zz), aq / (c * d * zz)],
            n,
        )? * ctx.dens(
            "(aq/b, aq/c, aq/dZ, aq/bcdZ)_N",
            &[aq / b, aq / c, aq / (d * zz), aq / (b * c * d * zz)],
            n,
        )?
    } else {
        ctx.nums(
            "(aq, aq/bc, aq/bZ, aq/cZ)_N",
            &[aq, aq / (b * c), aq / (b * zz), aq / (c * zz)],
            n,
        )? * ctx.dens(
            "(aq/b, aq/c, aq/Z, aq/bcZ)_N",
            &[aq / b, aq / c, aq / zz, aq / (b * c * zz)],
            n,
        )?
    };
    product_eval(ctx, value)
}

fn general_lhs(ctx: &mut Ctx, v: &Vars) -> R<Evaluation> {
    let (a, b, c, d, e, f, g, q, z, zz) = (
        v.a(),
        v.b(),
        v.c(),
        v.d(),
        v.e(),
        v.f(),
        v.g(),
        v.q,
        v.z,
        v.zz,
    );
    let h = v.p(Param::H);
    let t = v.p(Param::T);
    let n = v.big_n();
    let aq = a * q;
    let q_neg_n = ctx.qp(-n);
    let a_qn1 = a * ctx.qp(n + 1);
    let parity = if v.odd() {
        [f * zz, g * zz, h * zz, t / zz]
    } else {
        [zz, f * g * zz, f * h * zz, g * h * zz]
    };
    let acc = sum_terms(ctx, compositions_bounded(v.order, v.n()), |ctx, x| {
        let total = x.iter().sum::<usize>() as i64;
        let mut term = ctx.delta(z, x)?
            * ctx.well_poised(a, total)?
            * ctx.pair_product(z, x)?
            * ctx.nums(
                "(a, q^-N, b, c, d, e)_|x|",
                &[a, q_neg_n, b, c, d, e],
                total,
            )?
            * ctx.dens(
                "(aq^(N+1), aq/b, aq/c, aq/d, aq/e)_|x|",
                &[a_qn1, aq / b, aq / c, aq / d, aq / e],
                total,
            )?
            * ctx.dens("parity factor", &parity, total)?
            * ctx.qp(total);
        for (i, &zi) in z.iter().enumerate() {
            let xi = x[i] as i64;
            term *= ctx.num("(t/z_i)_|x|", t / zi, total)?
                * ctx.den("(t/z_i)_(|x|-x_i)", t / zi, total - xi)?
                * ctx.nums("(f z_i, g z_i, h z_i)_x_i", &[f * zi, g * zi, h * zi], xi)?;
        }
        Ok(term * ctx.inv_q_ratio_product(z, x)?)
    })?;
    sum_eval(ctx, one(), &acc)
}
