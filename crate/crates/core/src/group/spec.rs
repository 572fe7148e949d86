use super::{infinite_dihedral, Group, GroupError};

/// Parses a group spec such as `Z`, `Z^2`, `F_2` or `D_inf`.
pub fn parse_group(spec: &str) -> Result<Group, GroupError> {
    let s = spec.trim();
    let unknown = || GroupError::UnknownGroup(s.to_string());
    if s.eq_ignore_ascii_case("D_inf") || s.eq_ignore_ascii_case("Dinf") {
        return Ok(infinite_dihedral());
    }
    let (head, rest) = s.split_at(s.chars().next().map_or(0, |c| c.len_utf8()));
    let rest = rest.trim_start_matches(['^', '_']);
    let rank = if rest.is_empty() && head == "Z" {
        1
    } else {
        rest.parse::<usize>().map_err(|_| unknown())?
    };
    match head {
        "Z" if (1..=4).contains(&rank) => Ok(Group::integers(rank)),
        "F" if (1..=3).contains(&rank) => Ok(Group::free(rank)),
        _ => Err(unknown()),
    }
}
