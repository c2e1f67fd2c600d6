//! Certificate constants from decay and growth functions given on the command line.
//!
//! Function specs:
//! `exp:a,b,c` is `a e^{−bt} + c`; `const:c`; `affine:p,q` is `p + qt`;
//! `sat:p,q,r` is `p(1 − e^{−qt}) + r`; `tab:t0:v0,t1:v1,…` is a table
//! (decay tables take a trailing `;limit`).

use std::fmt;

use serde::Serialize;

use crate::certificates::{
    choose_t_star, entering_time, main_constants, tec_constants, AttractionCertificate, DecayFn, GrowthFn,
    TecCertificate,
};
use crate::error::{Error, Result};

fn numbers(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|_| Error::Config(format!("not a number: {p:?}"))))
        .collect()
}

fn split_kind(spec: &str) -> Result<(&str, &str)> {
    spec.split_once(':').ok_or_else(|| Error::Config(format!("function spec {spec:?} lacks a kind prefix")))
}

fn table(body: &str) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut times = Vec::new();
    let mut values = Vec::new();
    for pair in body.split(',') {
        let (t, v) = pair
            .split_once(':')
            .ok_or_else(|| Error::Config(format!("table entry {pair:?} is not t:v")))?;
        times.push(numbers(t)?[0]);
        values.push(numbers(v)?[0]);
    }
    Ok((times, values))
}

fn arity(kind: &str, v: &[f64], n: usize) -> Result<()> {
    if v.len() == n {
        Ok(())
    } else {
        Err(Error::Config(format!("{kind} takes {n} numbers, got {}", v.len())))
    }
}

pub fn parse_decay(spec: &str) -> Result<DecayFn> {
    let (kind, body) = split_kind(spec)?;
    match kind {
        "exp" => {
            let v = numbers(body)?;
            arity(kind, &v, 3)?;
            DecayFn::exp_floor(v[0], v[1], v[2])
        }
        "tab" => {
            let (rows, limit) = body
                .rsplit_once(';')
                .ok_or_else(|| Error::Config("decay tables need a trailing ;limit".into()))?;
            let (t, v) = table(rows)?;
            DecayFn::tabulated(t, v, numbers(limit)?[0])
        }
        _ => Err(Error::Config(format!("unknown decay kind {kind:?}"))),
    }
}

pub fn parse_growth(spec: &str) -> Result<GrowthFn> {
    let (kind, body) = split_kind(spec)?;
    match kind {
        "const" => {
            let v = numbers(body)?;
            arity(kind, &v, 1)?;
            GrowthFn::constant(v[0])
        }
        "affine" => {
            let v = numbers(body)?;
            arity(kind, &v, 2)?;
            GrowthFn::affine(v[0], v[1])
        }
        "sat" => {
            let v = numbers(body)?;
            arity(kind, &v, 3)?;
            GrowthFn::saturating(v[0], v[1], v[2])
        }
        "tab" => {
            let (t, v) = table(body)?;
            GrowthFn::tabulated(t, v)
        }
        _ => Err(Error::Config(format!("unknown growth kind {kind:?}"))),
    }
}

/// `auto`, `auto:<margin>` or a positive number.
pub fn parse_t_star(spec: &str, beta: &DecayFn) -> Result<f64> {
    match spec.split_once(':') {
        _ if spec == "auto" => choose_t_star(beta, 0.5),
        Some(("auto", m)) => choose_t_star(beta, numbers(m)?[0]),
        _ => {
            let t = numbers(spec)?[0];
            if t > 0.0 {
                Ok(t)
            } else {
                Err(Error::Config(format!("t_star must be positive, got {t}")))
            }
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CertifyOutput {
    pub tec: TecCertificate,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub attraction: Option<AttractionCertificate>,
    /// `(radius, n_R, t_R)`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub entering: Option<(f64, u64, f64)>,
}

pub struct CertifyRequest<'a> {
    pub beta: &'a str,
    pub j: &'a str,
    pub t_star: &'a str,
    pub alpha: Option<&'a str>,
    pub r0: Option<f64>,
    pub radius: Option<f64>,
}

pub fn certify(req: &CertifyRequest<'_>) -> Result<CertifyOutput> {
    let beta = parse_decay(req.beta)?;
    let j = parse_growth(req.j)?;
    let t_star = parse_t_star(req.t_star, &beta)?;
    let tec = tec_constants(&beta, &j, t_star)?;
    let attraction = match req.alpha {
        Some(a) => {
            let alpha = parse_decay(a)?;
            let r0 = req.r0.ok_or_else(|| Error::Config("--alpha needs --r0".into()))?;
            Some(main_constants(&alpha, &beta, &j, r0, t_star)?)
        }
        None => None,
    };
    let entering = match req.radius {
        Some(r) => {
            let (n, t) = entering_time(r, &tec)?;
            Some((r, n, t))
        }
        None => None,
    };
    Ok(CertifyOutput { tec, attraction, entering })
}

impl fmt::Display for CertifyOutput {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let row = |f: &mut fmt::Formatter<'_>, k: &str, v: f64| writeln!(f, "{k:<10} {v:>16.9}");
        row(f, "t_star", self.tec.t_star)?;
        row(f, "beta_star", self.tec.beta_star)?;
        row(f, "beta(0)", self.tec.beta_zero)?;
        row(f, "J_star", self.tec.j_star)?;
        row(f, "R_star", self.tec.r_star)?;
        row(f, "kappa", self.tec.kappa)?;
        row(f, "kappa*R*", self.tec.absorbing_radius())?;
        if let Some(a) = &self.attraction {
            row(f, "alpha_star", a.alpha_star)?;
            row(f, "rho", a.rho)?;
            row(f, "K", a.k)?;
            row(f, "omega", a.omega)?;
        }
        if let Some((r, n, t)) = self.entering {
            row(f, "radius", r)?;
            writeln!(f, "{:<10} {n:>16}", "n_R")?;
            row(f, "t_R", t)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_specs() {
        assert_eq!(parse_decay("exp:2,1,0.5").unwrap().eval(0.0), 2.5);
        assert_eq!(parse_growth("affine:1,1").unwrap().eval(2.0), 3.0);
        assert_eq!(parse_growth("const:2").unwrap().eval(9.0), 2.0);
        assert_eq!(parse_decay("tab:0:1,1:0.4;0.1").unwrap().eval(0.5), 0.7);
        assert!(parse_decay("exp:1,2").is_err());
        assert!(parse_growth("cubic:1").is_err());
        assert!(parse_decay("1,2,3").is_err());
    }

    #[test]
    fn t_star_forms() {
        let b = parse_decay("exp:1,1,0").unwrap();
        assert!((parse_t_star("auto", &b).unwrap() - 2f64.ln()).abs() < 2e-9);
        assert_eq!(parse_t_star("2", &b).unwrap(), 2.0);
        assert!(parse_t_star("-1", &b).is_err());
    }

    #[test]
    fn full_request() {
        let out = certify(&CertifyRequest {
            beta: "exp:2,1,0.5",
            j: "affine:1,1",
            t_star: "2",
            alpha: Some("exp:2,1,0"),
            r0: Some(5.0),
            radius: Some(100.0),
        })
        .unwrap();
        let a = out.attraction.as_ref().unwrap();
        assert!((a.k - 5.0 * 2.0 / (2.0 * (-2f64).exp())).abs() < 1e-12);
        assert!(out.entering.unwrap().1 >= 1);
        assert!(out.to_string().contains("R_star"));
    }
}
