use bounds_core::catalog::{builtin_catalog, builtin_source, parse_catalog, CatalogError, Expect, Side, TAG_AS_PRINTED};

const ENTRY: &str = "entry demo-lower
target=sinc
side=lower
domain=(0,pi/2)
expr=\"1-x^2/6\"
sharp=lo
expect=certified
ref=\"demo\"
end
";

fn with(field: &str, value: &str) -> String {
    ENTRY
        .lines()
        .map(|l| if l.starts_with(&format!("{field}=")) { format!("{field}={value}") } else { l.to_owned() })
        .collect::<Vec<_>>()
        .join("\n")
}

fn reason(text: &str) -> String {
    parse_catalog(text).unwrap_err().to_string()
}

#[test]
fn builtin_has_the_full_catalog() {
    let c = builtin_catalog();
    assert!(c.len() >= 110, "{}", c.len());
    assert_eq!(parse_catalog(builtin_source()).unwrap(), c);
    let mut ids: Vec<_> = c.entries.iter().map(|e| e.id.as_str()).collect();
    ids.sort();
    ids.dedup();
    assert_eq!(ids.len(), c.len());
}

#[test]
fn as_printed_entries_have_corrected_twins_or_are_tagged() {
    let c = builtin_catalog();
    for e in &c.entries {
        assert_eq!(e.expect == Expect::Violated, e.has_tag(TAG_AS_PRINTED), "{}", e.id);
    }
    for (printed, twin) in [("thm3-lower-as-printed", "thm3-lower-corrected"), ("lem3-cos-lower-as-printed", "lem3-cos-lower")] {
        let p = c.lookup(printed).unwrap();
        let t = c.lookup(twin).unwrap();
        assert_eq!(p.target, t.target);
        assert_eq!(p.side, t.side);
        assert_eq!(t.expect, Expect::Certified);
    }
}

#[test]
fn suspect_constant_is_flagged() {
    let c = builtin_catalog();
    let b = c.constant("b_1702b").unwrap();
    assert!(b.is_suspect());
    assert_eq!(b.reference_decimal.as_deref(), Some("3.81578"));
    assert!(!c.constant("a_1702a").unwrap().is_suspect());
}

#[test]
fn minimal_entry_parses() {
    let c = parse_catalog(ENTRY).unwrap();
    assert_eq!(c.entries[0].side, Side::Lower);
}

#[test]
fn format_errors_name_the_line() {
    match parse_catalog(&with("side", "sideways")) {
        Err(CatalogError::Format { line, message, .. }) => {
            assert_eq!(line, 3);
            assert!(message.contains("side"), "{message}");
        }
        other => panic!("{other:?}"),
    }
    assert!(reason(&with("target", "zeta")).contains("unknown target"));
    assert!(reason(&with("domain", "0,1")).contains("interval"));
    assert!(reason(&with("domain", "(0,inf]")).contains("infinite"));
    assert!(reason(&with("expr", "\"1-x^\"")).contains("line 5"));
    assert!(reason(&with("sharp", "middle")).contains("sharp"));
    assert!(reason(&ENTRY.replace("end\n", "")).contains("missing `end`"));
    assert!(reason(&format!("{ENTRY}bogus line\n")).contains("unexpected line"));
}

#[test]
fn validation_errors() {
    assert!(reason(&format!("{ENTRY}{ENTRY}")).contains("duplicate id"));
    assert!(reason(&with("expect", "violated")).contains(TAG_AS_PRINTED));
    assert!(reason(&with("expr", "\"1-a*x^2\"")).contains("undeclared parameter a"));
    assert!(reason(&with("expr", "\"y\"")).contains("y is only available"));
    assert!(reason(&ENTRY.replace("demo-lower", "Demo")).contains("kebab"));
    assert!(reason(&with("domain", "(1,1)")).contains("empty"));
    assert!(reason(&with("expr", "\"log(x-1)\"")).contains("not evaluable"));
    let bad_const = "const k = \"1/6\" decimal=0.5 ref=\"x\"\n";
    assert!(reason(bad_const).contains("disagrees"));
}

#[test]
fn parameter_grid_must_lie_in_range() {
    let text = ENTRY.replace("expr=\"1-x^2/6\"", "expr=\"1-a*x^2\"\nparam a in (0,1/6] default 1/6 grid 1/12,1/3");
    assert!(reason(&text).contains("outside its range"));
    let ok = ENTRY.replace("expr=\"1-x^2/6\"", "expr=\"1-a*x^2\"\nparam a in (0,1/6] default 1/6 grid 1/12,1/6");
    let c = parse_catalog(&ok).unwrap();
    assert_eq!(c.entries[0].param_names(), ["a"]);
}
