//! Reference evaluation against values frozen from mpmath at 70 digits,
//! plus identity residuals at several working precisions.

use bounds_core::catalog::builtin_catalog;
use bounds_core::expr::parse_expr;
use bounds_core::oracle::{eval_beta, eval_ref, FunctionId};
use bounds_core::{Context, Ext, Precision, Real, RefValue};
use proptest::prelude::*;

const FUNCTIONS: &[(&str, &str, &str)] = &[
    ("sin", "0.001", "9.9999983333334166666646825397100970015131473480866e-4"),
    ("sin", "0.1", "9.9833416646828152306814198410622026989915388017982e-2"),
    ("sin", "0.5", "4.794255386042030002732879352155713880818033679406e-1"),
    ("sin", "0.7853981633974483", "7.071067811865475176015453724356416533979133411614e-1"),
    ("sin", "1", "8.4147098480789650665250232163029899962256306079837e-1"),
    ("sin", "1.25", "9.4898461935558621434849084703604925037801603452389e-1"),
    ("sin", "1.5", "9.9749498660405443094172337114148732270665142592212e-1"),
    ("sin", "2.75", "3.8166099205233169857656137237778030108224775862122e-1"),
    ("sin", "7.5", "9.3799997677473885794846379814904723643183139550803e-1"),
    ("cos", "0.001", "9.999995000000416666652777778025793648037918892129e-1"),
    ("cos", "0.1", "9.9500416527802576609556198780387029483857622541508e-1"),
    ("cos", "0.5", "8.7758256189037271611628158260382965199164519710974e-1"),
    ("cos", "0.7853981633974483", "7.0710678118654753120014335177405635979200546023072e-1"),
    ("cos", "1", "5.4030230586813971740093660744297660373231042061792e-1"),
    ("cos", "1.25", "3.1532236239526866544753855243803801372798570798276e-1"),
    ("cos", "1.5", "7.0737201667702910088189851434268709085091027563347e-2"),
    ("cos", "2.75", "-9.2430237863246354409665948952671347821088477239597e-1"),
    ("cos", "7.5", "3.4663531783502581097161933617189557837175314080506e-1"),
    ("tan", "0.001", "1.0000003333334666667206349425044180343149597741934e-3"),
    ("tan", "0.1", "1.0033467208545054505808004578111153681900480457644e-1"),
    ("tan", "0.5", "5.4630248984379051325517946578028538329755172017979e-1"),
    ("tan", "0.7853981633974483", "9.9999999999999998076867830836024874282328230397926e-1"),
    ("tan", "1", "1.5574077246549022305069748074583601730872507723815"),
    ("tan", "1.25", "3.0095696738628312881575638943862439313916376996061"),
    ("tan", "1.5", "1.4101419947171719387646083651987756445659543577236e+1"),
    ("tan", "2.75", "-4.1291789448493248776396687326112912373625582036206e-1"),
    ("tan", "7.5", "2.7060138667726907767628022723879950088834463045223"),
    ("asin", "0.001", "1.0000001666667416667113095541914906261446976557328e-3"),
    ("asin", "0.1", "1.0016742116155979634552317945269331856867597222963e-1"),
    ("asin", "0.5", "5.2359877559829887307710723054658381403286156656252e-1"),
    ("asin", "0.7853981633974483", "9.0333911076651283182452183270258356749763821781057e-1"),
    ("acos", "0.001", "1.5697963266282298775646103820855599514724400020318"),
    ("acos", "0.1", "1.4706289056333368228857985121870581235299087274579"),
    ("acos", "0.5", "1.047197551196597746154214461093167628065723133125"),
    ("acos", "0.7853981633974483", "6.6745721602838378740679985893716787460094648187699e-1"),
    ("atan", "0.001", "9.9999966666686666652380963492054401162093455426801e-4"),
    ("atan", "0.1", "9.9668652491162027378446119878020590243278322504315e-2"),
    ("atan", "0.5", "4.6364760900080611621425623146121440202853705428612e-1"),
    ("atan", "0.7853981633974483", "6.6577375002835385764336168912444052129414777039149e-1"),
    ("atan", "1", "7.8539816339744830961566084581987572104929234984378e-1"),
    ("atan", "1.25", "8.9605538457134395617480071802993782702457844484684e-1"),
    ("atan", "1.5", "9.8279372324732906798571061101466601449687745363163e-1"),
    ("atan", "2.75", "1.222025323210989637041741743922570490882978396351"),
    ("atan", "7.5", "1.4382447944982225979614042479354815855386179699977"),
    ("sinh", "0.001", "1.0000001666666750000001984127011684303601491103097e-3"),
    ("sinh", "0.1", "1.0016675001984402582372938352190502351492091687856e-1"),
    ("sinh", "0.5", "5.2109530549374736162242562641149155910592898261148e-1"),
    ("sinh", "0.7853981633974483", "8.6867096148600959715993242673771665255564873247466e-1"),
    ("sinh", "1", "1.1752011936438014568823818505956008151557179813341"),
    ("sinh", "1.25", "1.6019190803008256379028303015122139399292918032171"),
    ("sinh", "1.5", "2.1292794550948174968343874946776316488317891195043"),
    ("sinh", "2.75", "7.7893520114907320187551340102993535478647004695144"),
    ("sinh", "7.5", "9.0402093068584652953510919038935846083532327339165e+2"),
    ("cosh", "0.001", "1.0000005000000416666680555555803571431327160514704"),
    ("cosh", "0.1", "1.005004168055803598987978442968341644709626277859"),
    ("cosh", "0.5", "1.1276259652063807852262251614026720125478471180987"),
    ("cosh", "0.7853981633974483", "1.3246090892520058383100001247416560305939149235443"),
    ("cosh", "1", "1.5430806348152437784779056207570616826015291123659"),
    ("cosh", "1.25", "1.8884238771610157382277157281600515427224425955453"),
    ("cosh", "1.5", "2.3524096152432473257676679654416441701739607488654"),
    ("cosh", "2.75", "7.8532798726974395914575640358573052971733345645932"),
    ("cosh", "7.5", "9.0402148377021667736869229238944699119252108472823e+2"),
    ("tanh", "0.001", "9.999996666667999999460317679012257046692967922854e-4"),
    ("tanh", "0.1", "9.9667994624955817118305083678352183538962095776734e-2"),
    ("tanh", "0.5", "4.6211715726000975850231848364367254873028928033011e-1"),
    ("tanh", "0.7853981633974483", "6.5579420263267243017282944234088143048477482612257e-1"),
    ("tanh", "1", "7.6159415595576488811945828260479359041276859725794e-1"),
    ("tanh", "1.25", "8.4828363995751289761338764670750445373857592067843e-1"),
    ("tanh", "1.5", "9.0514825364486643824230369645649559722764113515878e-1"),
    ("tanh", "2.75", "9.9185972456820774534967078914285033086550448747324e-1"),
    ("tanh", "7.5", "9.9999938819554614875054970643513120729654226275472e-1"),
    ("exp", "0.001", "1.0010005001667083416680557539930583115630762005807"),
    ("exp", "0.1", "1.1051709180756476248117078264902466682245471947375"),
    ("exp", "0.5", "1.6487212707001281468486507878141635716537761007101"),
    ("exp", "0.7853981633974483", "2.193280050738015435469932551479372683149563656019"),
    ("exp", "1", "2.7182818284590452353602874713526624977572470937"),
    ("exp", "1.25", "3.4903429574618413761305460296722654826517343987624"),
    ("exp", "1.5", "4.4816890703380648226020554601192758190057498683697"),
    ("exp", "2.75", "1.5642631884188171610212698046156658845038035034108e+1"),
    ("exp", "7.5", "1.8080424144560632069038014827788054520278443581199e+3"),
    ("log", "0.001", "-6.9077552789821370520539743640530926228033044658863"),
    ("log", "0.1", "-2.3025850929940456840179914546843642076011014886288"),
    ("log", "0.5", "-6.9314718055994530941723212145817656807550013436026e-1"),
    ("log", "0.7853981633974483", "-2.4156447527049045693407652922272242518579805342822e-1"),
    ("log", "1", "0.0"),
    ("log", "1.25", "2.2314355131420975576629509030983450337460108554801e-1"),
    ("log", "1.5", "4.0546510810816438197801311546434913657199042346249e-1"),
    ("log", "2.75", "1.0116009116784799252274793350487761636707065852169"),
    ("log", "7.5", "2.014903020542264756578772448690536776097591777731"),
    ("sqrt", "0.001", "3.1622776601683793319988935444327185337195551393252e-2"),
    ("sqrt", "0.1", "3.1622776601683793319988935444327185337195551393252e-1"),
    ("sqrt", "0.5", "7.0710678118654752440084436210484903928483593768847e-1"),
    ("sqrt", "0.7853981633974483", "8.8622692545275800822402805353099091716503298711425e-1"),
    ("sqrt", "1", "1.0"),
    ("sqrt", "1.25", "1.1180339887498948482045868343656381177203091798058"),
    ("sqrt", "1.5", "1.2247448713915890490986420373529456959829737403283"),
    ("sqrt", "2.75", "1.6583123951776999245574663683353433419635442727947"),
    ("sqrt", "7.5", "2.7386127875258305672848489140040106697637234749899"),
    ("gamma", "0.001", "9.9942377248459546611498220129964400046521761014561e+2"),
    ("gamma", "0.1", "9.5135076986687318362924871772654021925505786260884"),
    ("gamma", "0.5", "1.7724538509055160272981674833411451827975494561224"),
    ("gamma", "0.7853981633974483", "1.1810431149254740189683404730669425511993082981015"),
    ("gamma", "1", "1.0"),
    ("gamma", "1.25", "9.0640247705547707798267128896691800074879192072002e-1"),
    ("gamma", "1.5", "8.8622692545275801364908374167057259139877472806119e-1"),
    ("gamma", "2.75", "1.6083594219855456592319415231637938164922515131418"),
    ("gamma", "7.5", "1.8712543057977883464760770536039504240417722324461e+3"),
];
const BETA: &[(&str, &str, &str)] = &[
    ("0.5", "0.5", "3.1415926535897932384626433832795028841971693993751"),
    ("0.25", "0.75", "4.4428829381583662470158809900606936986146216893757"),
    ("0.001", "0.999", "1.0000016449359609158565351393131916470015271196275e+3"),
    ("2.5", "0.3", "2.3721057749802979490313616274270915353314078301645"),
    ("7", "0.125", "5.9543874312474435450455126618274804378514155107719"),
];
const CONSTANTS: &[(&str, &str)] = &[
    ("a_1702a", "3.81578420690724682221666401658996798456591394694"),
    ("b_1702b", "3.2949707811500611320579223763239232253367634094667"),
    ("gamma_1702c", "9.9027819515039926731966197920090448574602564810379e-1"),
    ("alpha_thm1", "3.0"),
    ("beta_thm1", "2.9646454922608429351452617105369048825204580168591"),
    ("prop1702_hi", "1.2337005501361698273543113749845188919142124259051e+1"),
    ("anglesio_hi", "1.7777777777777777777777777777777777777777777777778e-1"),
    ("anglesio_lo", "1.6425571607494936302644453227389910626924482965821e-1"),
];

fn ext(s: &str) -> Ext {
    s.parse().unwrap()
}

/// `|got - want|` must be inside the reported bound and below `10^-digits`
/// relative to the value.
fn check(what: &str, got: RefValue, want: &str, digits: u32) {
    let want = ext(want);
    let diff = (got.value - want).abs();
    let scale = want.abs().max(Ext::ONE);
    let tol = Ext::from(10f64.powi(-(digits as i32))) * scale;
    assert!(diff <= tol, "{what}: off by {:e}", diff.to_f64());
    // The frozen values carry 50 digits; anything below that is rounding.
    let slack = 1e-48 * scale.to_f64();
    assert!(diff.to_f64() <= got.err_bound + slack, "{what}: error {:e} exceeds bound {:e}", diff.to_f64(), got.err_bound);
}

#[test]
fn elementary_and_gamma_match_frozen_values() {
    for digits in [30, 40, 45] {
        let prec = Precision::new(digits).unwrap();
        for (name, x, want) in FUNCTIONS {
            let f = FunctionId::from_name(name).unwrap();
            let got = eval_ref(f, ext(x), prec).unwrap();
            check(&format!("{name}({x})"), got, want, digits);
        }
    }
}

#[test]
fn beta_matches_frozen_values() {
    let prec = Precision::default();
    for (a, b, want) in BETA {
        let got = eval_beta(ext(a), ext(b), prec).unwrap();
        check(&format!("beta({a},{b})"), got, want, 40);
    }
}

#[test]
fn catalog_constants_match_frozen_values() {
    let cat = builtin_catalog();
    let ctx = Context::new(&cat).unwrap();
    for (name, want) in CONSTANTS {
        let c = cat.constant(name).unwrap_or_else(|| panic!("{name} missing"));
        let got = ctx.constant_value(&c.closed_form).unwrap();
        check(name, got, want, 40);
    }
}

#[test]
fn precision_outside_range_is_rejected() {
    assert!(Precision::new(29).is_err());
    assert!(Precision::new(65).is_err());
    assert!(Precision::new(64).is_ok());
}

#[test]
fn domain_errors_are_reported() {
    let prec = Precision::default();
    assert!(eval_ref(FunctionId::Log, Ext::ZERO, prec).is_err());
    assert!(eval_ref(FunctionId::Sqrt, -Ext::ONE, prec).is_err());
    assert!(eval_ref(FunctionId::Acos, ext("1.5"), prec).is_err());
    assert!(eval_ref(FunctionId::Gamma, -Ext::from(2), prec).is_err());
}

fn residual(text: &str, x: Ext) -> (f64, f64) {
    let e = parse_expr(text).unwrap();
    let env = bounds_core::expr::Env::new().with("x", x);
    let r = bounds_core::expr::eval_expr(&e, &env, Precision::default()).unwrap();
    (r.value.abs().to_f64(), r.err_bound)
}

fn identities_hold(digits: u32, x: f64) {
    let tol = 10f64.powi(-(digits as i32));
    let x = Ext::from(x);
    for id in [
        "sin(x)^2+cos(x)^2-1",
        "cosh(x)^2-sinh(x)^2-1",
        "gamma(x+1)-x*gamma(x)",
        "gamma(x)*gamma(1-x)-pi/sin(pi*x)",
        "beta(x,1-x)-pi/sin(pi*x)",
        "tan(x)-sin(x)/cos(x)",
        "exp(log(x))-x",
    ] {
        let (r, err) = residual(id, x);
        assert!(r <= tol.max(err), "{id} at {}: residual {r:e}", x.to_f64());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn identities_at_30_digits(x in 0.01f64..0.99) {
        identities_hold(30, x);
    }

    #[test]
    fn identities_at_40_digits(x in 0.01f64..0.99) {
        identities_hold(40, x);
    }
}
