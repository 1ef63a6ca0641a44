//! Scenario tables and identity pools for synthetic immigration prompts.
//!
//! Pools are curated so that no surface of one category occurs inside a
//! surface of another, except cities, which appear inside addresses.

/// Bumped whenever any table or pool changes, since dataset bytes depend on it.
pub const TABLES_VERSION: &str = "1";

pub const PRACTICE_AREAS: [(&str, &[&str]); 7] = [
    (
        "Visa Applications",
        &["Family-based visa", "Employment-based visa", "Student visa"],
    ),
    ("Green Cards", &["Adjustment of status", "PERM processing"]),
    (
        "Deportation Defense",
        &["Removal proceedings", "Cancellation of removal"],
    ),
    (
        "Citizenship and Naturalization",
        &["Citizenship applications", "Dual citizenship resolution"],
    ),
    (
        "Asylum and Refugee Law",
        &["Filing asylum applications", "Defending refugees"],
    ),
    ("DACA", &["Initial applications", "Renewals"]),
    (
        "Employment Compliance",
        &["I-9 verification", "E-Verify compliance"],
    ),
];

pub const DOCUMENT_TITLES: [&str; 10] = [
    "Employer Support Letter",
    "Affidavit of Support",
    "Personal Statement",
    "Birth Certificate",
    "Marriage Certificate",
    "Tax Returns",
    "Work Authorization Document",
    "Medical Examination Report",
    "Police Clearance Certificate",
    "Immigration History Summary",
];

pub const FIRST_NAMES: [&str; 50] = [
    "Amara", "Bogdan", "Camila", "Darius", "Elena", "Farid", "Gabriela", "Hiroshi", "Ifeoma", "Javier",
    "Kateryna", "Luis", "Mei", "Nadia", "Omar", "Priya", "Quentin", "Rosa", "Samir", "Tatiana",
    "Umar", "Valentina", "Wei", "Ximena", "Yusuf", "Zainab", "Adebayo", "Beatriz", "Chidi", "Dmitri",
    "Esperanza", "Fatima", "Goran", "Hana", "Ilya", "Jun", "Kwame", "Leticia", "Mateo", "Linh",
    "Oksana", "Paulo", "Rahul", "Sofia", "Tomasz", "Ama", "Vikram", "Wanjiru", "Yara", "Zoran",
];

pub const LAST_NAMES: [&str; 50] = [
    "Okonkwo", "Petrenko", "Hernandez", "Tehrani", "Kowalski", "Haddad", "Castillo", "Tanaka", "Eze", "Morales",
    "Shevchenko", "Gutierrez", "Zhang", "Rahimi", "Farouk", "Sharma", "Dubois", "Mendoza", "Aziz", "Volkova",
    "Qureshi", "Rossi", "Liu", "Villanueva", "Demir", "Bello", "Adeyemi", "Carvalho", "Nwosu", "Ivanov",
    "Salazar", "Begum", "Novak", "Kimura", "Sokolov", "Park", "Mensah", "Ortega", "Romero", "Tran",
    "Bondarenko", "Ferreira", "Iyer", "Nikolaidis", "Wojcik", "Asante", "Reddy", "Kamau", "Saleh", "Jovanovic",
];

pub const NATIONALITIES: [&str; 24] = [
    "Mexican", "Indian", "Chinese", "Filipino", "Brazilian", "Nigerian", "Vietnamese", "Colombian",
    "Guatemalan", "Salvadoran", "Haitian", "Ukrainian", "Korean", "Pakistani", "Egyptian", "Kenyan",
    "Peruvian", "Polish", "Ghanaian", "Jamaican", "Ethiopian", "Venezuelan", "Honduran", "Japanese",
];

pub const VISA_TYPES: [&str; 10] = [
    "an H-1B visa",
    "an F-1 student visa",
    "an L-1A visa",
    "an O-1 visa",
    "a B-2 visitor visa",
    "a TN visa",
    "an E-2 treaty investor visa",
    "a J-1 exchange visitor visa",
    "an H-2B visa",
    "a K-1 fiance visa",
];

pub const STREET_NAMES: [&str; 20] = [
    "Maple", "Oak", "Cedar", "Pine", "Birch", "Willow", "Elm", "Spruce", "Magnolia", "Juniper",
    "Aspen", "Sycamore", "Chestnut", "Hickory", "Laurel", "Poplar", "Walnut", "Cypress", "Dogwood", "Redwood",
];

pub const STREET_SUFFIXES: [&str; 6] = ["Street", "Avenue", "Road", "Boulevard", "Lane", "Drive"];

/// `(city, state code)`.
pub const CITIES: [(&str, &str); 24] = [
    ("Houston", "TX"),
    ("San Antonio", "TX"),
    ("Dallas", "TX"),
    ("Miami", "FL"),
    ("Tampa", "FL"),
    ("Chicago", "IL"),
    ("Phoenix", "AZ"),
    ("Denver", "CO"),
    ("Seattle", "WA"),
    ("Atlanta", "GA"),
    ("Boston", "MA"),
    ("Newark", "NJ"),
    ("Los Angeles", "CA"),
    ("San Diego", "CA"),
    ("Sacramento", "CA"),
    ("Charlotte", "NC"),
    ("Nashville", "TN"),
    ("Portland", "OR"),
    ("Minneapolis", "MN"),
    ("Detroit", "MI"),
    ("Philadelphia", "PA"),
    ("Baltimore", "MD"),
    ("Las Vegas", "NV"),
    ("Salt Lake City", "UT"),
];

pub const COMPANY_STEMS: [&str; 20] = [
    "Northwind", "Bluepeak", "Crestview", "Ironwood", "Silverline", "Greenfield", "Lakeshore", "Brightpath",
    "Redstone", "Stillwater", "Highmark", "Pioneer Valley", "Evergreen", "Keystone", "Harborview", "Stonebridge",
    "Westbrook", "Sunrise", "Granite Bay", "Copperleaf",
];

pub const COMPANY_SUFFIXES: [&str; 6] = [
    "Technologies Inc.",
    "Logistics LLC",
    "Health Systems",
    "Manufacturing Co.",
    "Software Corp.",
    "Hospitality Group",
];

pub const LAW_OFFICES: [&str; 12] = [
    "Alvarez & Brooks Immigration Law",
    "Whitfield Legal Group",
    "Harrington Immigration Partners",
    "Lindqvist & Osei LLP",
    "Pemberton Law Office",
    "Calloway & Stroud Attorneys",
    "Beaumont Immigration Counsel",
    "Ashworth & Delacroix PLLC",
    "Fairbanks Law Associates",
    "Marlowe Immigration Center",
    "Thornbury & Vance Law Firm",
    "Kingsley Legal Services",
];

pub const MONTHS: [&str; 12] = [
    "January", "February", "March", "April", "May", "June", "July", "August", "September", "October",
    "November", "December",
];

pub fn companies() -> impl Iterator<Item = String> {
    COMPANY_STEMS
        .iter()
        .flat_map(|stem| COMPANY_SUFFIXES.iter().map(move |suffix| format!("{stem} {suffix}")))
}

pub fn person_names() -> impl Iterator<Item = String> {
    FIRST_NAMES
        .iter()
        .flat_map(|first| LAST_NAMES.iter().map(move |last| format!("{first} {last}")))
}
