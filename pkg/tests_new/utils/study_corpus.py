"""Study-shaped fixture corpus and its scripted web.

Builds 180 largest-file records over 9 participants whose provenance mix,
source categories, redownloadability and byte sizes reproduce the
reference biggest-file study tables. Publicly redownloadable files are
served by the mock web as small stand-in payloads whose digest is the
record hash; their record sizes stay the study sizes.
"""

import hashlib
from dataclasses import dataclass, field
from datetime import datetime, timedelta

try:
    from datetime import UTC
except ImportError:  # Python < 3.11
    from datetime import timezone

    UTC = timezone.utc

from app.models import CorpusRecord, SourceCategory

from .mock_web import MockWeb

MB = 1_000_000
ZONE_INTERNET = 3
NEWEST_MTIME = datetime(2024, 3, 1, tzinfo=UTC)
PARTICIPANTS = [f"p{i}" for i in range(1, 10)]

# category -> (total, not_rd, public_rd, rd_w_auth)
EXPECTED_RU_ROWS = {
    SourceCategory.CLOUD_COLLABORATION: (7, 5, 0, 2),
    SourceCategory.WEBMAIL: (8, 0, 0, 8),
    SourceCategory.BIG_TECH_CSP: (6, 6, 0, 0),
    SourceCategory.SMALL_CSP: (1, 1, 0, 0),
    SourceCategory.APPLICATIONS_TOOLS: (17, 17, 0, 0),
    SourceCategory.LOCAL_ACCESS: (5, 0, 0, 5),
    SourceCategory.DIRECT_LINK: (6, 0, 6, 0),
    SourceCategory.LINKS_NOT_RECORDED: (130, 130, 0, 0),
}
EXPECTED_HU_ROWS = {
    SourceCategory.CLOUD_COLLABORATION: (7, 0, 0, 7),
    SourceCategory.WEBMAIL: (8, 0, 0, 8),
    SourceCategory.BIG_TECH_CSP: (6, 0, 0, 6),
    SourceCategory.SMALL_CSP: (6, 5, 1, 0),
    SourceCategory.APPLICATIONS_TOOLS: (44, 44, 0, 0),
    SourceCategory.LOCAL_ACCESS: (5, 0, 0, 5),
    SourceCategory.DIRECT_LINK: (11, 0, 10, 1),
    SourceCategory.LINKS_NOT_RECORDED: (93, 93, 0, 0),
}


def payload_for(participant: str, name: str) -> bytes:
    return f"webpurge study payload {participant}/{name}\n".encode()


def digest_of(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


@dataclass
class StudyCorpus:
    """Records plus the web content that answers for them."""

    records: list[CorpusRecord] = field(default_factory=list)
    files: dict[str, bytes] = field(default_factory=dict)
    pages: dict[str, str] = field(default_factory=dict)
    statuses: dict[str, int] = field(default_factory=dict)
    timeouts: list[str] = field(default_factory=list)

    def install(self, web: MockWeb, timeout_delay: float = 1.5) -> None:
        """Script the mock web; unlisted URLs answer 404."""
        for url, data in self.files.items():
            web.add_file(url, data)
        for url, html in self.pages.items():
            web.add_page(url, html)
        for url, status in self.statuses.items():
            web.add_status(url, status)
        for url in self.timeouts:
            web.add_timeout(url, timeout_delay)

    def for_participant(self, participant: str) -> list[CorpusRecord]:
        return [r for r in self.records if r.participant == participant]


class _Builder:
    def __init__(self) -> None:
        self.corpus = StudyCorpus()
        self._serial = 0

    def add(
        self,
        participant: str,
        name: str,
        size_mb: float,
        ru: str | None = None,
        hu: str | None = None,
        zone: bool | None = None,
        tallied: bool = True,
        digest: str | None = None,
    ) -> CorpusRecord:
        self._serial += 1
        if zone is None:
            zone = ru is not None or hu is not None
        record = CorpusRecord(
            path=f"C:\\Users\\{participant}\\Downloads\\{name}",
            size_bytes=round(size_mb * MB),
            participant=participant,
            referrer_url=ru,
            host_url=hu,
            zone_id=ZONE_INTERNET if zone else None,
            modified_at=NEWEST_MTIME - timedelta(days=3 * self._serial),
            hash_full=digest or digest_of(f"{participant}/{name}/{self._serial}".encode()),
            tallied=tallied,
        )
        self.corpus.records.append(record)
        return record

    def add_public(
        self, participant: str, name: str, size_mb: float, url: str, ru: str | None = None
    ) -> CorpusRecord:
        """Record whose HU serves the file publicly."""
        data = payload_for(participant, name)
        self.corpus.files[url] = data
        return self.add(participant, name, size_mb, ru=ru, hu=url, digest=digest_of(data))

    def add_unlinked(self, participant: str, count: int, stem: str, ext: str) -> None:
        for i in range(count):
            self.add(participant, f"{stem}_{i:02d}{ext}", 4.0 + 3.5 * i)


def _p1_local_videos(b: _Builder) -> None:
    for i in range(5):
        name = f"holiday_video_{i}.mp4"
        b.add("p1", name, 8.0, hu=f"file:///C:/Users/p1/Downloads/{name}")
    b.add("p1", "installer_bundle.zip", 6.0, hu="http://www.mediafire.com/")

    originals = []
    for i in range(16):
        # two unlinked files still carry an Internet ZoneId
        originals.append(b.add("p1", f"recording_{i:02d}.mkv", 20.0 + i, zone=i < 2))
    for original in originals[:3]:
        copy_name = original.file_name.replace(".mkv", " - Copy.mkv")
        b.add("p1", copy_name, original.size_bytes / MB, digest=original.hash_full)


def _p2_webmail(b: _Builder) -> None:
    for i in range(8):
        b.add(
            "p2",
            f"attachment_{i}.pdf",
            5.0,
            ru=f"http://outlook.office.com/mail/inbox/id/AAMk{i:04d}",
            hu=f"http://outlook.office.com/owa/service.svc/s/GetFileAttachment?id=AAMk{i:04d}",
        )
    for i in range(2):
        name = f"teams_recording_{i}.mp4"
        b.add(
            "p2",
            name,
            5.0,
            ru="http://teams.microsoft.com/",
            hu=f"http://teams.microsoft.com/l/file/t{i}/{name}",
        )
    b.add_unlinked("p2", 15, "project", ".psd")


def _p3_cloud(b: _Builder) -> None:
    for i, size in enumerate((30.0, 25.0, 20.0, 18.0, 15.0, 12.1)):
        name = f"IMG_{4100 + i}.MOV"
        b.add(
            "p3",
            name,
            size,
            ru="http://www.icloud.com/",
            hu=f"http://cvws.icloud-content.com/B/AbC{i}x/{name}?o=Av1",
        )
    for i, size in enumerate((1500.0, 1217.6)):
        name = f"site_backup_{i}.zip"
        b.add(
            "p3",
            name,
            size,
            ru="http://contoso.sharepoint.com/sites/team/Shared%20Documents/Forms/AllItems.aspx",
            hu=f"http://contoso.sharepoint.com/sites/team/Shared%20Documents/{name}",
        )
    for i, size in enumerate((150.0, 120.0, 90.0)):
        name = f"meeting_{i}.mp4"
        b.add(
            "p3",
            name,
            size,
            ru="http://teams.microsoft.com/",
            hu=f"http://teams.microsoft.com/l/file/m{i}/{name}",
        )
    iso_url = "http://mirror.example.org/private/ubuntu-22.04.iso"
    b.add("p3", "ubuntu-22.04.iso", 63.0, hu=iso_url)
    b.corpus.statuses[iso_url] = 401
    b.add_unlinked("p3", 13, "render", ".mov")


def _download_page(file_name: str, file_url: str) -> str:
    return f"""<!DOCTYPE html>
<html><head><title>Downloads</title></head>
<body>
  <nav><a href="/">Home</a> <a href="/pricing">Pricing</a> <a href="#top">Top</a></nav>
  <p>Release notes are <a href="/notes/changelog.txt">here</a>.</p>
  <a class="button" href="{file_url}">Download {file_name}</a>
  <a href="mailto:support@example.org">Support</a>
</body></html>
"""


def _p4_direct_links(b: _Builder) -> None:
    for i, size in enumerate((12.0, 9.5, 8.1, 6.4, 5.2, 4.4)):
        name = f"setup_tool_{i}.exe"
        page = f"http://www.softvendor{i}.example/downloads/"
        url = f"http://dl.softvendor{i}.example/files/{name}"
        b.corpus.pages[page] = _download_page(name, url)
        b.add_public("p4", name, size, url, ru=page)

    for i, (size, search) in enumerate(
        ((812.4, "http://www.google.com/"), (356.0, "http://www.bing.com/"))
    ):
        name = f"dataset_{i}.zip"
        b.add_public("p4", name, size, f"http://data.example.org/releases/{name}", ru=search)
    for i, size in enumerate((174.2, 96.0)):
        name = f"talk_{i}.mp4"
        b.add_public("p4", name, size, f"http://cdn.example.net/video/{name}")

    name = "shared_photos.zip"
    page = "http://www.sendspace.com/file/abc123"
    file_url = f"http://fs03.sendspace.com/dl/abc123/{name}"
    data = payload_for("p4", name)
    b.corpus.pages[page] = _download_page(name, file_url)
    b.corpus.files[file_url] = data
    b.add("p4", name, 50.0, ru="http://www.sendspace.com/", hu=page, digest=digest_of(data))
    b.add_unlinked("p4", 14, "backup", ".vhd")


def _p5_video_converter(b: _Builder) -> None:
    originals = []
    for i in range(22):
        originals.append(
            b.add("p5", f"clip_{i:02d}.mp4", 4.5 + i, hu=f"http://www.y2mate.com/youtube/v{i:02d}")
        )
    for original in originals[:3]:
        b.add(
            "p5",
            original.file_name.replace(".mp4", " (1).mp4"),
            original.size_bytes / MB,
            hu=original.host_url,
            digest=original.hash_full,
        )


def _p6_pdf_tool(b: _Builder) -> None:
    """Participant excluded from the provenance tally."""
    ru = "http://www.ilovepdf.com/compress_pdf"
    for i in range(25):
        hu = f"http://api.ilovepdf.com/v1/download/t{i:02d}"
        kwargs = {"ru": ru, "hu": hu} if i < 5 else {"ru": ru} if i < 15 else {"hu": hu}
        b.add("p6", f"document_{i:02d}.pdf", 4.2 + i * 0.3, tallied=False, **kwargs)


def _p7_local_and_university(b: _Builder) -> None:
    sources = (
        ("chapter_1.rpa", 1850.0, "vn_chapter_1.zip"),
        ("chapter_2.rpa", 1420.0, "vn_chapter_2.zip"),
        ("chapter_3.rpa", 1036.2, "vn_chapter_3.zip"),
        ("soundtrack.pak", 180.0, "soundtrack_pack.zip"),
        ("extras.pak", 120.0, "extras_pack.zip"),
    )
    for name, size, archive in sources:
        b.add("p7", name, size, ru=f"C:\\Users\\p7\\Downloads\\{archive}")
    for i in range(4):
        url = f"http://cloudstor.aarnet.edu.au/plus/s/Xq{i}/download"
        b.add("p7", f"survey_data_{i}.h5", 60.0 + i, hu=url)
        b.corpus.timeouts.append(url)
    b.add_unlinked("p7", 16, "lecture", ".mp4")


def _p8_partial(b: _Builder) -> None:
    for i in range(3):
        name = f"capture_{i}.webm"
        extension_url = f"chrome-extension://mhjfbmdgcfjbbpaeojofohoefgiehjai/{name}"
        b.add("p8", name, 40.0 - i, hu=extension_url)
    b.add("p8", "extracted.tar", 22.0, hu="http://ezyzip.com/")


def build_study_corpus() -> StudyCorpus:
    """The 180-record, 9-participant study-shaped corpus."""
    b = _Builder()
    _p1_local_videos(b)
    _p2_webmail(b)
    _p3_cloud(b)
    _p4_direct_links(b)
    _p5_video_converter(b)
    _p6_pdf_tool(b)
    _p7_local_and_university(b)
    _p8_partial(b)
    b.add("p9", "movie.mkv", 1400.0)
    return b.corpus
