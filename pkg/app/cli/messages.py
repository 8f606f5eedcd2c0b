"""User-facing CLI message templates and constants.

Centralizes every string the commands print so wording stays consistent
between the interactive session, summaries, and error output.
"""

# Exit codes
EXIT_OK = 0
EXIT_PARTIAL = 1
EXIT_FATAL = 2
EXIT_AUTH = 3

# Prompts
PASSPHRASE_PROMPT = "Recipe passphrase"
APPROVAL_PROMPT = "Purge this file? [y]es / [n]o / [a]ll remaining / [q]uit"

# Errors
ERROR_LINE = "Error: {message}"
ERROR_AUTH = "Error: recipe could not be decrypted (wrong passphrase or tampered recipe)"
ERROR_NO_PASSPHRASE = "Error: a passphrase is required ({env} or interactive prompt)"
ERROR_NO_STORE = "Error: no recipe store at {store_dir}"
ERROR_RESTORE_TARGET = "Give a recipe id or --all, not both"
ERROR_REPORT_SOURCE = "Give either a corpus file or --root"

# Scan
DRIVE_LINE = "Drive {root}: {used} used, {free} free of {total}"
SKIPPED_LINE = "Skipped {count} unreadable entries"
NO_FILES = "No files found."

# Purge
NO_CANDIDATES = "No file among the {examined} examined can be redownloaded; nothing to purge."
NO_ELIGIBLE = "No candidate is eligible for purging (use --allow-auth to include sign-in sources)."
TARGET_MET = "Target of {target} reached after examining {examined} files; planning stopped early."
TARGET_NOT_MET = "Target of {target} not reached; projected public savings {projected}."
CANDIDATE_LINE = "{index}. {path}\n   {size}, {category}, {availability} via {via}, saves {saving}"
PURGE_SUMMARY = (
    "Purged {purged} of {approved} approved files: {removed} removed, {freed} freed"
    "{target_part}; {failed} failed."
)
PURGE_TARGET_PART = " (target {target})"
NOTHING_APPROVED = "Nothing approved; no file was touched."
REPAIR_NOTICE = (
    "Recipe store repaired: {quarantined} orphan blobs quarantined, "
    "{dropped} dangling entries dropped."
)

# Maintenance
NO_RECIPES = "No recipes to maintain."
MAINTENANCE_SUMMARY = "{current} current, {stale} stale of {total} recipes."
STALE_HEADER = "These files can no longer be redownloaded; find them manually:"
STALE_LINE = "  {recipe_id}  {file_name}  ({reason})"

# Restore
RESTORED_LINE = "Restored {path} from {url} ({mode})"
RESTORE_FAILED_LINE = "Failed {recipe_id}: {reason}"
NOTHING_TO_RESTORE = "No recipes to restore."
NO_STORE_ENTRIES = "The recipe store is empty."
RESTORE_SUMMARY = "Restored {restored} of {total} files."

# Report
SUMMARY_TITLE = "Biggest file analysis summary"
RU_TABLE_TITLE = "File redownloadability using ReferrerUrl (RU) metadata"
HU_TABLE_TITLE = "File redownloadability using HostUrl (HU) metadata"
COMBINED_LINE = (
    "Best channel per file: {public} public, {auth} with sign-in; "
    "per participant {per_participant}."
)
