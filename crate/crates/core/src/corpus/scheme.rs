//! Three-tier subject classification: 4-digit field codes grouped into
//! main fields by their 2-digit prefix, and main fields grouped into areas.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Read;

use serde::{Deserialize, Serialize};

use super::CorpusError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Field {
    pub code: u16,
    pub name: String,
    pub main_field: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MainField {
    pub prefix: u8,
    pub name: String,
    pub area: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemeCounts {
    pub areas: usize,
    pub main_fields: usize,
    pub fields: usize,
}

#[derive(Debug, Deserialize)]
struct SchemeRow {
    code: String,
    field: String,
    main_field: String,
    area: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassificationScheme {
    fields: BTreeMap<u16, Field>,
    main_fields: BTreeMap<u8, MainField>,
}

/// Area and main-field totals of the reference classification.
pub const REFERENCE_AREAS: usize = 5;
pub const REFERENCE_MAIN_FIELDS: usize = 27;

impl ClassificationScheme {
    /// Loads `code,field,main_field,area` rows and validates the hierarchy.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self, CorpusError> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let mut rows = Vec::new();
        for (i, row) in rdr.deserialize::<SchemeRow>().enumerate() {
            let row = row.map_err(|e| CorpusError::Scheme(format!("row {}: {e}", i + 2)))?;
            rows.push(row);
        }
        let mut entries = Vec::with_capacity(rows.len());
        for row in rows {
            let code = parse_code(&row.code)
                .ok_or_else(|| CorpusError::Scheme(format!("invalid code {:?}", row.code)))?;
            entries.push((code, row.field, row.main_field, row.area));
        }
        Self::from_entries(entries)
    }

    pub fn from_entries<I>(entries: I) -> Result<Self, CorpusError>
    where
        I: IntoIterator<Item = (u16, String, String, String)>,
    {
        let mut fields = BTreeMap::new();
        let mut main_fields: BTreeMap<u8, MainField> = BTreeMap::new();
        let mut area_of_main: BTreeMap<String, (u8, String)> = BTreeMap::new();
        for (code, field, main_field, area) in entries {
            if !(1000..=9999).contains(&code) {
                return Err(CorpusError::Scheme(format!("code {code} is not 4 digits")));
            }
            let prefix = (code / 100) as u8;
            match main_fields.get(&prefix) {
                Some(existing) if existing.name != main_field => {
                    return Err(CorpusError::Scheme(format!(
                        "prefix {prefix} maps to both {:?} and {main_field:?}",
                        existing.name
                    )));
                }
                Some(existing) if existing.area != area => {
                    return Err(CorpusError::Scheme(format!(
                        "main field {main_field:?} maps to both {:?} and {area:?}",
                        existing.area
                    )));
                }
                Some(_) => {}
                None => {
                    if let Some((other, _)) = area_of_main.get(&main_field) {
                        return Err(CorpusError::Scheme(format!(
                            "main field {main_field:?} spans prefixes {other} and {prefix}"
                        )));
                    }
                    area_of_main.insert(main_field.clone(), (prefix, area.clone()));
                    main_fields.insert(
                        prefix,
                        MainField {
                            prefix,
                            name: main_field,
                            area,
                        },
                    );
                }
            }
            let dup = fields.insert(
                code,
                Field {
                    code,
                    name: field,
                    main_field: prefix,
                },
            );
            if dup.is_some() {
                return Err(CorpusError::Scheme(format!("duplicate code {code}")));
            }
        }
        if fields.is_empty() {
            return Err(CorpusError::Scheme("empty classification scheme".into()));
        }
        Ok(Self {
            fields,
            main_fields,
        })
    }

    pub fn counts(&self) -> SchemeCounts {
        SchemeCounts {
            areas: self.areas().len(),
            main_fields: self.main_fields.len(),
            fields: self.fields.len(),
        }
    }

    /// Checks the area and main-field totals of the reference scheme.
    pub fn check_reference(&self) -> Result<(), CorpusError> {
        let counts = self.counts();
        if counts.areas != REFERENCE_AREAS || counts.main_fields != REFERENCE_MAIN_FIELDS {
            return Err(CorpusError::Scheme(format!(
                "expected {REFERENCE_AREAS} areas and {REFERENCE_MAIN_FIELDS} main fields, found {} and {}",
                counts.areas, counts.main_fields
            )));
        }
        Ok(())
    }

    pub fn field(&self, code: u16) -> Option<&Field> {
        self.fields.get(&code)
    }

    pub fn main_field(&self, prefix: u8) -> Option<&MainField> {
        self.main_fields.get(&prefix)
    }

    pub fn main_field_of(&self, code: u16) -> Option<&MainField> {
        self.fields
            .get(&code)
            .and_then(|f| self.main_fields.get(&f.main_field))
    }

    pub fn area_of(&self, code: u16) -> Option<&str> {
        self.main_field_of(code).map(|m| m.area.as_str())
    }

    pub fn fields(&self) -> impl Iterator<Item = &Field> {
        self.fields.values()
    }

    pub fn main_fields(&self) -> impl Iterator<Item = &MainField> {
        self.main_fields.values()
    }

    pub fn areas(&self) -> BTreeSet<&str> {
        self.main_fields.values().map(|m| m.area.as_str()).collect()
    }
}

pub(crate) fn parse_code(raw: &str) -> Option<u16> {
    let raw = raw.trim();
    if raw.len() != 4 || !raw.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    raw.parse().ok().filter(|c| *c >= 1000)
}

/// Area label for a set of areas: the single area, or the sorted distinct
/// names joined with `" & "`.
pub fn combined_area_label<'a, I>(areas: I) -> String
where
    I: IntoIterator<Item = &'a str>,
{
    let set: BTreeSet<&str> = areas.into_iter().collect();
    set.into_iter().collect::<Vec<_>>().join(" & ")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(code: u16, field: &str, main: &str, area: &str) -> (u16, String, String, String) {
        (code, field.into(), main.into(), area.into())
    }

    #[test]
    fn bundled_scheme_loads() {
        let file = include_str!("../../../../data/asjc_scheme.csv");
        let scheme = ClassificationScheme::from_csv(file.as_bytes()).unwrap();
        scheme.check_reference().unwrap();
        assert_eq!(scheme.counts().areas, 5);
        assert_eq!(scheme.counts().main_fields, 27);
        assert_eq!(scheme.counts().fields, 334);
        assert_eq!(scheme.area_of(2700), Some("Health Sciences"));
        assert_eq!(scheme.area_of(1000), Some("Multidisciplinary"));
        assert_eq!(scheme.main_field_of(1312).unwrap().name, "Biochemistry, Genetics and Molecular Biology");
        let mut names = std::collections::BTreeSet::new();
        for f in scheme.fields() {
            assert!(scheme.main_field(f.main_field).is_some());
            assert!(names.insert(f.name.as_str()), "field name {:?} repeated", f.name);
        }
    }

    #[test]
    fn rejects_inconsistent_prefix() {
        let err = ClassificationScheme::from_entries(vec![
            row(2700, "General Medicine", "Medicine", "Health Sciences"),
            row(2701, "Misc", "Nursing", "Health Sciences"),
        ]);
        assert!(matches!(err, Err(CorpusError::Scheme(_))));
    }

    #[test]
    fn rejects_main_field_in_two_areas() {
        let err = ClassificationScheme::from_entries(vec![
            row(2700, "General Medicine", "Medicine", "Health Sciences"),
            row(2701, "Misc", "Medicine", "Life Sciences"),
        ]);
        assert!(err.is_err());
    }

    #[test]
    fn rejects_duplicate_code_and_short_code() {
        assert!(ClassificationScheme::from_entries(vec![
            row(2700, "A", "Medicine", "Health Sciences"),
            row(2700, "B", "Medicine", "Health Sciences"),
        ])
        .is_err());
        assert!(ClassificationScheme::from_csv("code,field,main_field,area\n270,A,B,C\n".as_bytes()).is_err());
    }

    #[test]
    fn small_scheme_fails_reference_check() {
        let scheme =
            ClassificationScheme::from_entries(vec![row(2700, "A", "Medicine", "Health Sciences")]).unwrap();
        assert!(scheme.check_reference().is_err());
    }

    #[test]
    fn combined_labels_sorted_and_deduplicated() {
        assert_eq!(combined_area_label(["Life Sciences", "Health Sciences"]), "Health Sciences & Life Sciences");
        assert_eq!(combined_area_label(["Health Sciences", "Health Sciences"]), "Health Sciences");
        assert_eq!(combined_area_label(Vec::<&str>::new()), "");
    }
}
