use std::fmt;
use std::str::FromStr;

use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::tables::{
    CITIES, COMPANY_STEMS, COMPANY_SUFFIXES, DOCUMENT_TITLES, FIRST_NAMES, LAST_NAMES, MONTHS, NATIONALITIES,
    PRACTICE_AREAS, STREET_NAMES, STREET_SUFFIXES, VISA_TYPES,
};
use crate::error::Error;

/// Fabricated client and employer details for one prompt.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityBundle {
    pub client_name: String,
    pub client_nationality: String,
    pub visa_type: String,
    pub home_address: String,
    /// City of `home_address`, reused by offline document text.
    pub home_city: String,
    pub case_id: String,
    pub filing_date: String,
    pub employer_name: String,
    pub employer_tax_id: String,
    pub employer_address: String,
    pub document_title: String,
}

pub fn fabricate_entities<R: Rng + ?Sized>(rng: &mut R) -> EntityBundle {
    let client_name = format!("{} {}", pick(rng, &FIRST_NAMES), pick(rng, &LAST_NAMES));
    let (home_address, home_city) = address(rng);
    let (employer_address, _) = address(rng);
    EntityBundle {
        client_name,
        client_nationality: pick(rng, &NATIONALITIES).to_string(),
        visa_type: pick(rng, &VISA_TYPES).to_string(),
        home_address,
        home_city,
        case_id: case_id(rng),
        filing_date: date(rng),
        employer_name: format!("{} {}", pick(rng, &COMPANY_STEMS), pick(rng, &COMPANY_SUFFIXES)),
        employer_tax_id: format!("{:02}-{:07}", rng.random_range(10..100), rng.random_range(0..10_000_000)),
        employer_address,
        document_title: pick(rng, &DOCUMENT_TITLES).to_string(),
    }
}

fn pick<'a, R: Rng + ?Sized>(rng: &mut R, pool: &'a [&'a str]) -> &'a str {
    pool.choose(rng).expect("non-empty pool")
}

fn address<R: Rng + ?Sized>(rng: &mut R) -> (String, String) {
    let (city, state) = *CITIES.choose(rng).expect("cities");
    let line = format!(
        "{} {} {}, {}, {} {:05}",
        rng.random_range(1..10_000),
        pick(rng, &STREET_NAMES),
        pick(rng, &STREET_SUFFIXES),
        city,
        state,
        rng.random_range(10_000..100_000),
    );
    (line, city.to_string())
}

fn case_id<R: Rng + ?Sized>(rng: &mut R) -> String {
    let letters: String = (0..3).map(|_| char::from(b'A' + rng.random_range(0..26u8))).collect();
    format!(
        "{letters}-{:04}-{:05}",
        rng.random_range(2015..2026),
        rng.random_range(0..100_000)
    )
}

/// A calendar-valid date rendered as `Month D, YYYY`.
fn date<R: Rng + ?Sized>(rng: &mut R) -> String {
    let year: u32 = rng.random_range(2019..=2025);
    let month = rng.random_range(0..12usize);
    let day = rng.random_range(1..=days_in_month(year, month + 1));
    format!("{} {}, {}", MONTHS[month], day, year)
}

pub(crate) fn days_in_month(year: u32, month: usize) -> u32 {
    match month {
        2 if (year % 4 == 0 && year % 100 != 0) || year % 400 == 0 => 29,
        2 => 28,
        4 | 6 | 9 | 11 => 30,
        _ => 31,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TaskType {
    Summarization,
    Translation,
    #[serde(rename = "Legal Analysis")]
    LegalAnalysis,
    Drafting,
}

impl TaskType {
    pub const ALL: [TaskType; 4] = [
        TaskType::Summarization,
        TaskType::Translation,
        TaskType::LegalAnalysis,
        TaskType::Drafting,
    ];

    pub const fn as_str(self) -> &'static str {
        match self {
            TaskType::Summarization => "Summarization",
            TaskType::Translation => "Translation",
            TaskType::LegalAnalysis => "Legal Analysis",
            TaskType::Drafting => "Drafting",
        }
    }
}

impl fmt::Display for TaskType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TaskType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        TaskType::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| Error::UnknownTaskType(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scenario {
    pub practice_area: String,
    pub subfield: String,
    pub task_type: TaskType,
}

pub fn select_scenario<R: Rng + ?Sized>(rng: &mut R) -> Scenario {
    let (area, subfields) = PRACTICE_AREAS.choose(rng).expect("practice areas");
    Scenario {
        practice_area: area.to_string(),
        subfield: pick(rng, subfields).to_string(),
        task_type: *TaskType::ALL.choose(rng).expect("task types"),
    }
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use regex::Regex;

    use super::*;
    use crate::mention::contains_placeholder;

    #[test]
    fn deterministic_for_seed() {
        let a = fabricate_entities(&mut ChaCha8Rng::seed_from_u64(42));
        let b = fabricate_entities(&mut ChaCha8Rng::seed_from_u64(42));
        assert_eq!(a, b);
    }

    #[test]
    fn invariants_over_many_draws() {
        let case = Regex::new(r"^[A-Z]{3}-\d{4}-\d{5}$").unwrap();
        let tax = Regex::new(r"^\d{2}-\d{7}$").unwrap();
        let date = Regex::new(r"^(January|February|March|April|May|June|July|August|September|October|November|December) (\d{1,2}), (\d{4})$").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let b = fabricate_entities(&mut rng);
            let fields = [
                &b.client_name,
                &b.client_nationality,
                &b.visa_type,
                &b.home_address,
                &b.home_city,
                &b.case_id,
                &b.filing_date,
                &b.employer_name,
                &b.employer_tax_id,
                &b.employer_address,
                &b.document_title,
            ];
            for f in fields {
                assert!(!f.is_empty());
                assert!(!contains_placeholder(f));
            }
            assert!(case.is_match(&b.case_id), "{}", b.case_id);
            assert!(tax.is_match(&b.employer_tax_id), "{}", b.employer_tax_id);
            let caps = date.captures(&b.filing_date).expect("date format");
            let month = MONTHS.iter().position(|m| *m == &caps[1]).unwrap() + 1;
            let day: u32 = caps[2].parse().unwrap();
            let year: u32 = caps[3].parse().unwrap();
            assert!(day >= 1 && day <= days_in_month(year, month));
            assert!(b.home_address.contains(&b.home_city));
        }
    }

    #[test]
    fn leap_years() {
        assert_eq!(days_in_month(2024, 2), 29);
        assert_eq!(days_in_month(2023, 2), 28);
        assert_eq!(days_in_month(2000, 2), 29);
        assert_eq!(days_in_month(2100, 2), 28);
    }

    #[test]
    fn subfield_belongs_to_area() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut saw_visa_area = false;
        for _ in 0..500 {
            let s = select_scenario(&mut rng);
            let (_, subs) = PRACTICE_AREAS.iter().find(|(a, _)| *a == s.practice_area).unwrap();
            assert!(subs.contains(&s.subfield.as_str()));
            if s.practice_area == "Visa Applications" {
                saw_visa_area = true;
                assert!(["Family-based visa", "Employment-based visa", "Student visa"].contains(&s.subfield.as_str()));
            }
            assert!(TaskType::ALL.contains(&s.task_type));
        }
        assert!(saw_visa_area);
        assert_eq!(
            select_scenario(&mut ChaCha8Rng::seed_from_u64(9)),
            select_scenario(&mut ChaCha8Rng::seed_from_u64(9))
        );
    }

    #[test]
    fn task_type_names() {
        assert_eq!("Legal Analysis".parse::<TaskType>().unwrap(), TaskType::LegalAnalysis);
        assert!(matches!("Poetry".parse::<TaskType>(), Err(Error::UnknownTaskType(_))));
        assert_eq!(serde_json::to_string(&TaskType::LegalAnalysis).unwrap(), "\"Legal Analysis\"");
    }
}
