//! Checks every family member against values produced by
//! `fixtures/gen_hash32.py`, which evaluates the recurrences independently.

use replayguard::hashfns::hash32;

#[test]
fn family_matches_reference_script() {
    let table = include_str!("fixtures/hash32.tsv");
    let mut checked = 0;
    for line in table.lines().filter(|l| !l.starts_with('#')) {
        let cols: Vec<&str> = line.split('\t').collect();
        let [name, input, expect] = cols[..] else {
            panic!("bad fixture line {line:?}");
        };
        let data = if input == "-" {
            Vec::new()
        } else {
            hex::decode(input).unwrap()
        };
        let expect: u32 = expect.parse().unwrap();
        assert_eq!(hash32(name, &data).unwrap(), expect, "{name}({input})");
        checked += 1;
    }
    assert_eq!(checked, 9 * 8);
}
