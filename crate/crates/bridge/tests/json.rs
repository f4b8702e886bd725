use mr4mr::osc::{OscArg, OscMessage};
use mr4mr_bridge::{from_json, parse_lines, to_json};
use proptest::prelude::*;

fn arg() -> impl Strategy<Value = OscArg> {
    prop_oneof![
        any::<i32>().prop_map(OscArg::Int),
        any::<f32>()
            .prop_filter("finite", |f| f.is_finite())
            .prop_map(OscArg::Float),
        "[ -~]{0,20}".prop_map(OscArg::Str),
        proptest::collection::vec(any::<u8>(), 0..40).prop_map(OscArg::Blob),
    ]
}

fn message() -> impl Strategy<Value = OscMessage> {
    (
        "(/[a-z0-9_]{1,6}){1,4}",
        proptest::collection::vec(arg(), 0..8),
    )
        .prop_map(|(a, args)| OscMessage::new(a, args))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn roundtrip(m in message()) {
        let line = to_json(&m);
        prop_assert!(!line.contains('\n'));
        prop_assert_eq!(from_json(&line).unwrap(), m);
    }

    #[test]
    fn lines_preserve_order(ms in proptest::collection::vec(message(), 0..10)) {
        let text: String = ms.iter().map(|m| to_json(m) + "\n").collect();
        prop_assert_eq!(parse_lines(&text).unwrap(), ms);
    }
}

#[test]
fn float_values_survive_exactly() {
    for f in [0.1f32, -0.0, 1e-38, f32::MAX, 3.4028235e38, 1.0 / 3.0] {
        let m = OscMessage::new("/f", vec![OscArg::Float(f)]);
        let back = from_json(&to_json(&m)).unwrap();
        assert_eq!(
            back.args[0].as_float().unwrap().to_bits(),
            f.to_bits(),
            "{f}"
        );
    }
}

#[test]
fn one_bad_line_rejects_the_frame() {
    let good = to_json(&OscMessage::new("/a", vec![]));
    assert!(parse_lines(&format!("{good}\n{{\n{good}\n")).is_err());
    assert_eq!(parse_lines(&format!("\n{good}\r\n\n")).unwrap().len(), 1);
}
