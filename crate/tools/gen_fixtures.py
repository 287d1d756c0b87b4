#!/usr/bin/env python3
"""Generate the layout-parsed fixture documents and scripted model scenarios.

The output is checked in under fixtures/. Re-running this script must produce
byte-identical files; the Rust tests treat them as frozen inputs.

    python3 tools/gen_fixtures.py
"""

import json
import math
import os

ROOT = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "fixtures")
PAGE_W, PAGE_H = 612, 792

H1 = [20.2, 19.8, 20.0]
H2 = [14.1, 13.9, 14.0]


def line_block(kind, text, height):
    return {"type": kind, "text": text, "height": height}


class DocBuilder:
    """Accumulates (page, block) pairs in reading order and lays them out."""

    def __init__(self, doc_id, pages, header):
        self.doc_id = doc_id
        self.pages = pages
        self.header = header
        self.content = {p: [] for p in range(1, pages + 1)}
        self.counter = 0

    def title(self, page, level, text):
        heights = H1 if level == 1 else H2
        h = heights[self.counter % len(heights)]
        self.counter += 1
        self.content[page].append({"kind": "title", "text": text, "height": h})

    def para(self, page, text, kind="text"):
        self.content[page].append({"kind": kind, "text": text})

    def table(self, page, html, caption=None, caption_after=False, image=None, footnote=None):
        self.content[page].append(
            {"kind": "table", "html": html, "caption": caption,
             "caption_after": caption_after, "image": image, "footnote": footnote})

    def image(self, page, path, caption=None, chart=False):
        self.content[page].append({"kind": "chart" if chart else "image", "image": path, "caption": caption})

    def layout(self):
        pdf_info = []
        for page in range(1, self.pages + 1):
            blocks = self.content[page]
            n = max(len(blocks), 1)
            step = (PAGE_H - 140) / n
            y = 70.0
            para_blocks = []
            for b in blocks:
                h = round(min(step - 4, b.get("height", 12.0 * max(1, math.ceil(len(b.get("text", "")) / 95)))), 1)
                if b["kind"] == "title":
                    h = b["height"]
                bbox = [72.0, round(y, 1), 540.0, round(y + max(h, 8.0), 1)]
                para_blocks.append(render_block(b, bbox, h))
                y += step
            discarded = [
                span_block("header", self.header, [72.0, 30.0, 540.0, 42.0]),
                span_block("page_number", str(page), [296.0, 752.0, 316.0, 762.0]),
            ]
            if page % 10 == 0:
                discarded.append(span_block("footer", "See accompanying notes.", [72.0, 736.0, 300.0, 746.0]))
            info = {
                "page_idx": page - 1,
                "page_size": [PAGE_W, PAGE_H],
                "page_image": "pages/%s/page-%03d.png" % (self.doc_id, page),
                "para_blocks": para_blocks,
                "discarded_blocks": discarded,
            }
            pdf_info.append(info)
        return {"doc_id": self.doc_id, "_backend": "pipeline", "_version_name": "2.5.0", "pdf_info": pdf_info}


def span_block(kind, text, bbox):
    return {
        "type": kind,
        "bbox": bbox,
        "lines": [{"bbox": bbox, "spans": [{"bbox": bbox, "content": text, "type": "text"}]}],
    }


def render_block(b, bbox, h):
    kind = b["kind"]
    if kind in ("title", "text", "list", "interline_equation", "page_footnote", "index", "code"):
        line_bbox = [bbox[0], bbox[1], bbox[2], round(bbox[1] + h, 1)] if kind == "title" else bbox
        span_type = "interline_equation" if kind == "interline_equation" else "text"
        return {
            "type": kind,
            "bbox": bbox,
            "lines": [{"bbox": line_bbox, "spans": [{"bbox": line_bbox, "content": b["text"], "type": span_type}]}],
        }
    if kind == "table":
        children = []
        body = {
            "type": "table_body",
            "bbox": bbox,
            "lines": [{"bbox": bbox, "spans": [{"bbox": bbox, "type": "table", "html": b["html"]}]}],
        }
        if b.get("image"):
            body["lines"][0]["spans"][0]["image_path"] = b["image"]
        cap = span_block("table_caption", b["caption"], bbox) if b.get("caption") else None
        if cap and not b.get("caption_after"):
            children.append(cap)
        children.append(body)
        if cap and b.get("caption_after"):
            children.append(cap)
        if b.get("footnote"):
            children.append(span_block("table_footnote", b["footnote"], bbox))
        return {"type": "table", "bbox": bbox, "blocks": children}
    if kind in ("image", "chart"):
        children = [{
            "type": kind + "_body",
            "bbox": bbox,
            "lines": [{"bbox": bbox, "spans": [{"bbox": bbox, "type": "image", "image_path": b["image"]}]}],
        }]
        if b.get("caption"):
            children.append(span_block(kind + "_caption", b["caption"], bbox))
        return {"type": kind, "bbox": bbox, "blocks": children}
    raise ValueError(kind)


def anchored_pages(count, anchors):
    """Assign a start page to subsections 1..count by interpolating between anchors."""
    keys = sorted(anchors)
    pages = {}
    for i in range(1, count + 1):
        lo = max(k for k in keys if k <= i)
        hi = min(k for k in keys if k >= i)
        if lo == hi:
            pages[i] = anchors[lo]
        else:
            frac = (i - lo) / (hi - lo)
            pages[i] = int(anchors[lo] + frac * (anchors[hi] - anchors[lo]))
    return pages


FILLER_SENTENCES = [
    "The Company reviews these estimates on an ongoing basis and adjusts them as facts and circumstances change.",
    "Results for the periods presented are not necessarily indicative of results for any future period.",
    "Management evaluates the carrying value of these balances at least annually.",
    "Amounts are presented in thousands of dollars unless otherwise indicated.",
    "The following discussion should be read together with the consolidated financial statements.",
    "Changes in foreign exchange rates may cause reported results to differ from local currency results.",
    "The Company operates in a highly competitive environment that is rapidly evolving.",
    "Member growth varies seasonally, with the fourth and first quarters typically strongest.",
]


def filler(seed, n=2):
    return " ".join(FILLER_SENTENCES[(seed + k) % len(FILLER_SENTENCES)] for k in range(n))


def html_table(rows):
    out = ["<table>"]
    for r in rows:
        out.append("<tr>" + "".join("<td>%s</td>" % c for c in r) + "</tr>")
    out.append("</table>")
    return "".join(out)


PART1_TITLES = [
    "Item 1. Business", "Corporate Information", "Segments", "Domestic Streaming", "International Streaming",
    "Domestic DVD", "Competition", "Seasonality", "Revenue Recognition Overview", "Intellectual Property",
    "Employees", "Other Information", "Item 1A. Risk Factors", "Risks Related to Our Business",
    "Member Retention", "Content Acquisition", "Original Programming", "Pricing Risk", "Competitive Pressure",
    "Network Operations", "Marketing Channels", "Third-Party Platforms", "Cybersecurity", "Regulatory Matters",
    "Tax Matters", "Indebtedness", "Item 1B. Unresolved Staff Comments", "Item 2. Properties",
    "Item 3. Legal Proceedings", "Item 4. Mine Safety Disclosures",
]

PART8_TITLES = [
    "Overview and Results of Operations", "Key Performance Indicators", "Domestic Streaming Segment",
    "International Streaming Segment", "Domestic DVD Segment", "Consolidated Results", "Cost of Revenues",
    "Technology and Development", "General and Administrative", "Interest Expense", "Interest and Other Income",
    "Provision for Income Taxes", "Segment Contribution Profit", "Marketing", "Liquidity and Capital Resources",
    "Free Cash Flow", "Contractual Obligations", "Off-Balance Sheet Arrangements", "Indemnifications",
    "Critical Accounting Policies", "Content Amortization", "Income Taxes", "Stock-Based Compensation",
    "Recent Accounting Pronouncements", "Item 7A. Quantitative and Qualitative Disclosures About Market Risk",
    "Interest Rate Risk", "Foreign Currency Risk", "Item 8. Financial Statements and Supplementary Data",
    "Report of Independent Registered Public Accounting Firm", "Opinion on the Financial Statements",
    "Basis for Opinion", "Internal Control over Financial Reporting", "Management's Report",
    "Changes in Internal Control", "Limitations on Effectiveness", "Marketing Spend Analysis",
    "Segment Information Detail",
]


def netflix():
    d = DocBuilder("netflix10k", 73, "Netflix, Inc. | Annual Report on Form 10-K")
    # front matter on page 1, before any title
    d.para(1, "UNITED STATES SECURITIES AND EXCHANGE COMMISSION")
    d.para(1, "Washington, D.C. 20549")

    d.title(1, 1, "FORM 10-K")
    d.title(1, 2, "Annual Report Pursuant to Section 13 or 15(d) of the Securities Exchange Act of 1934")
    d.para(1, "For the fiscal year ended December 31, 2015. Commission File Number: 001-35727. Netflix, Inc., a Delaware corporation.")
    d.title(1, 2, "Documents Incorporated by Reference")
    d.para(1, "Portions of the registrant's Proxy Statement for its 2016 Annual Meeting of Stockholders are incorporated by reference into Part III.")

    d.title(2, 1, "Table of Contents")
    for entry in ["Part I ..... 1", "Item 1. Business ..... 1", "Item 1A. Risk Factors ..... 3",
                  "Part II ..... 16", "Item 8. Financial Statements ..... 35"]:
        d.para(2, entry, kind="index")

    # PART I: subsections 3.1 .. 3.30 across pages 2..15
    d.title(2, 1, "PART I")
    p1_pages = anchored_pages(30, {1: 2, 9: 3, 19: 5, 22: 6, 30: 15})
    extra = {
        9: ["We derive revenues from monthly membership fees for services related to streaming content and DVD-by-mail. Revenues are recognized ratably over each monthly membership period."],
        19: ["If we are unable to compete effectively, we may need to adjust pricing or service offerings, or increase marketing and advertising spending, which could adversely affect our operating results and margins."],
        22: ["We rely on advertising on search engines, social networking sites and television to attract new members, and changes to those channels could impair our member acquisition."],
    }
    for i, title in enumerate(PART1_TITLES, start=1):
        page = p1_pages[i]
        d.title(page, 2, title)
        for text in extra.get(i, [filler(i)]):
            d.para(page, text)
        if i == 4:
            d.table(8 if page < 8 else page, html_table([
                ["", "2015", "2014", "2013"],
                ["Paid memberships at end of period", "43,401", "37,698", "31,712"],
                ["Total memberships at end of period", "44,738", "39,114", "33,420"],
            ]), caption="Domestic streaming membership statistics (in thousands)")
        if i == 5:
            d.table(12 if page < 12 else page, html_table([
                ["", "2015", "2014"],
                ["International paid memberships", "27,438", "16,778"],
            ]), caption="International streaming membership statistics (in thousands)")
        if i == 7:
            d.para(page, "- Streaming video services\n- Linear television\n- Video games and user-generated content", kind="list")
    # continuation paragraphs for pages of part I without a section start
    covered = set(p1_pages.values())
    for page in range(3, 16):
        if page not in covered:
            d.para(page, filler(page, 3))
    # footnote and formula on page 14
    d.para(14, "(1) Membership counts exclude free-trial members.", kind="page_footnote")

    d.title(16, 1, "PART II")
    d.title(16, 1, "Item 5. Market for Registrant's Common Equity and Related Stockholder Matters")
    d.para(16, "Our common stock is traded on the NASDAQ Global Select Market under the symbol NFLX.")
    d.title(16, 2, "Stock Performance Graph")
    d.image(16, "images/netflix10k/stock-graph.jpg", caption="Comparison of 5 year cumulative total return", chart=True)
    d.title(16, 1, "Item 6. Selected Financial Data")
    d.table(16, html_table([
        ["", "2015", "2014", "2013"],
        ["Revenues", "$ 6,779,511", "$ 5,504,656", "$ 4,374,562"],
        ["Net income", "$ 122,641", "$ 266,799", "$ 112,403"],
    ]), caption="Consolidated Statements of Operations data (in thousands)")
    d.title(17, 1, "Item 6A. Net Revenue Per Member")
    d.table(17, html_table([["", "2015", "2014"], ["Average monthly revenue per paying membership", "$ 8.15", "$ 8.14"]]))
    d.para(17, "Average monthly revenue per paying membership = revenues / average paying memberships / 12", kind="interline_equation")

    d.title(17, 1, "Item 7. Management's Discussion and Analysis of Financial Condition and Results of Operations")
    p8_pages = anchored_pages(95, {1: 17, 20: 19, 37: 29, 60: 39, 81: 47, 95: 73})
    for i in range(1, 96):
        page = p8_pages[i]
        if i == 60:
            d.title(page, 2, "NETFLIX, INC.")
            d.para(page, "CONSOLIDATED STATEMENTS OF OPERATIONS")
            d.table(page, html_table([
                ["", "Year ended December 31, 2015", "Year ended December 31, 2014", "Year ended December 31, 2013"],
                ["Revenues", "$ 6,779,511", "$ 5,504,656", "$ 4,374,562"],
                ["Cost of revenues", "4,591,476", "3,752,760", "3,117,203"],
                ["Marketing", "824,092", "607,186", "469,942"],
                ["Operating income", "305,826", "402,648", "228,347"],
                ["Net income", "$ 122,641", "$ 266,799", "$ 112,403"],
            ]), caption="(in thousands, except per share data)", caption_after=True)
            continue
        if i == 81:
            d.title(page, 2, "Marketing")
            d.para(page, "Marketing expenses consist primarily of advertising expenses and payments made to our affiliates and device partners. Advertising expenses include promotional activities such as digital and television advertising. Advertising expenses were $714.3 million, $533.1 million and $404.0 million for the years ended December 31, 2015, 2014 and 2013, respectively.")
            continue
        title = PART8_TITLES[(i - 1) % len(PART8_TITLES)]
        if i > len(PART8_TITLES):
            title = "Note %d. %s" % (i - len(PART8_TITLES), title)
        d.title(page, 2, title)
        if i == 14:
            d.para(page, "Marketing expenses increased primarily due to an increase in advertising expenses to support global expansion.")
        elif i == 20:
            d.table(page, html_table([
                ["", "2015", "2014", "Change"],
                ["Revenues", "$ 6,779,511", "$ 5,504,656", "23%"],
                ["Operating income", "$ 305,826", "$ 402,648", "(24)%"],
            ]), caption="Consolidated results (in thousands)")
        elif i == 35:
            d.para(page, "The increase in marketing expenses was driven by advertising in newly launched markets.")
            d.image(page, "images/netflix10k/membership-growth.jpg", chart=True)
        elif i == 37:
            d.table(page, html_table([
                ["", "2015", "2014", "2013"],
                ["Advertising", "$ 714,300", "$ 533,100", "$ 404,000"],
                ["Affiliate and device partner payments", "$ 109,792", "$ 74,086", "$ 65,942"],
            ]), caption="Components of marketing expense (in thousands)",
                footnote="Amounts exclude internal personnel costs.")
        else:
            d.para(page, filler(i))
    covered = set(p8_pages.values())
    for page in range(18, 74):
        if page not in covered:
            d.para(page, filler(page, 3))
    return d


def greenfield():
    d = DocBuilder("greenfield_report", 73, "Greenfield Holdings Sustainability Report 2023")
    d.title(1, 1, "Message from the Chief Executive Officer")
    for i, t in enumerate(["Our Year in Review", "Strategy", "Looking Ahead"], start=1):
        d.title(i, 2, t)
        d.para(i, "We continued to invest in efficiency programs across all operating sites during the year.")
    d.title(4, 1, "Environmental Performance")
    pages = anchored_pages(50, {1: 4, 36: 40, 37: 41, 43: 49, 50: 60})
    topics = ["Energy Use", "Emissions Scope 1", "Emissions Scope 2", "Water Stewardship", "Waste Diversion",
              "Biodiversity", "Supplier Engagement", "Logistics", "Facilities", "Product Stewardship"]
    for i in range(1, 51):
        page = pages[i]
        if i == 36:
            d.title(page, 2, "Renewable Electricity Progress")
            d.para(page, "Figure 1 tracks the share of renewable electricity in our total electricity consumption from 2019 to 2023.")
            d.image(page, "images/greenfield_report/figure-1.png",
                    caption="Figure 1: Share of renewable electricity in total electricity consumption (%)", chart=True)
            continue
        if i == 37:
            d.title(page, 2, "Electricity Targets")
            d.table(page, html_table([
                ["Year", "Interim renewable electricity target"],
                ["2021", "10%"], ["2023", "15%"], ["2025", "25%"], ["2030", "50%"],
            ]), caption="Table 1: Interim renewable electricity targets")
            continue
        if i == 43:
            d.title(page, 2, "Progress Against Interim Targets")
            d.para(page, "Performance against each interim target is measured using the renewable share reported in our electricity dashboard. Where the reported share exceeds the interim target for a year, the excess is carried into the next planning cycle.")
            continue
        d.title(page, 2, "%s Update %d" % (topics[(i - 1) % len(topics)], (i - 1) // len(topics) + 1))
        d.para(page, "Site teams reported quarterly progress and verified the data with third-party reviewers.")
    covered = set(pages.values())
    for page in range(5, 61):
        if page not in covered:
            d.para(page, "Detailed site-level data are available in the accompanying data tables.")
    d.title(61, 1, "Social Responsibility")
    for page in range(61, 69):
        d.title(page, 2, "Community Programs %d" % (page - 60))
        d.para(page, "Employees volunteered in local programs focused on education and health.")
    d.title(69, 1, "Governance")
    for page in range(69, 74):
        d.title(page, 2, "Board Oversight %d" % (page - 68))
        d.para(page, "The board reviews sustainability risks at each scheduled meeting.")
    return d


def lease():
    d = DocBuilder("lease_agreement", 6, "Commercial Lease Agreement")
    d.title(1, 1, "Commercial Lease Agreement")
    d.para(1, "This Lease is made between Harbor Properties LLC (Landlord) and Northwind Traders Inc. (Tenant).")
    clauses = [
        ("Premises", "The Premises consist of 12,500 rentable square feet on the third floor of 400 Harbor Way."),
        ("Term", "The Term begins on March 1, 2022 and ends on February 28, 2027."),
        ("Base Rent", "Base Rent is $31,250 per month, increasing by 3% on each anniversary of the Commencement Date."),
        ("Security Deposit", "Tenant shall deposit $62,500 as security for performance of this Lease."),
        ("Use", "The Premises shall be used for general office purposes only."),
        ("Maintenance", "Landlord shall maintain the roof, structure and building systems."),
        ("Insurance", "Tenant shall carry commercial general liability insurance of at least $2,000,000 per occurrence."),
        ("Assignment", "Tenant may not assign this Lease without Landlord's prior written consent."),
        ("Default", "A default occurs if Tenant fails to pay rent within ten days after written notice."),
        ("Renewal Option", "Tenant has one option to renew the Term for five years at 95% of fair market rent."),
    ]
    for i, (t, text) in enumerate(clauses):
        page = 1 + (i * 5) // len(clauses) + 1
        d.title(page, 2, t)
        d.para(page, text)
    d.table(6, html_table([["Lease year", "Monthly base rent"], ["1", "$31,250"], ["2", "$32,188"], ["3", "$33,153"]]),
            caption="Rent schedule")
    return d


# ---------------------------------------------------------------- scenarios

def tool_call(name, args):
    return "<tool_call>\n" + json.dumps({"arguments": json.dumps(args), "name": name}) + "\n</tool_call>"


def think(text):
    return "<think>\n" + text + "\n</think>\n"


NETFLIX_Q = "What is advertising expense to sales ratio of Netflix in FY 2015? Round your answer to three decimal places."

NETFLIX_POLICY = [
    think('We need to answer: "what is advertising expense to sales ratio of Netflix in FY 2015? Round your answer to three decimal places." '
          "We need to locate advertising expense and sales (revenues) for FY 2015. From outline we have various sections. "
          'First, find advertising expense. The term "advertising" appears in sections. Search for "advertising".')
    + tool_call("search", {"keywords": ["advertising"]}),
    think('One of the results is in section_id "8.81" paragraph page_num "47.0". It says: "Advertising expenses were $714.3 million, '
          '$533.1 million and $404.0 million for the years ended December 31, 2015, 2014 and 2013, respectively." '
          "Thus advertising expense FY 2015 = $714.3 million. Now sales (revenues) for FY 2015: In consolidated statements of operations "
          '(section 8.60) we have revenues $6,779,511 (in thousands). Let\'s locate "Revenues".')
    + tool_call("search", {"keywords": ["Revenues"]}),
    think("We have advertising expense: $714.3 million (2015). We need to compute ratio = advertising expense / revenue. "
          "Revenue for 2015: $6,779,511 thousand = $6,779.511 million. Let's extract the advertising expense paragraph text to be sure.")
    + tool_call("read", {"section_ids": ["8.81"], "goal": "Extract the advertising expense amount for 2015"}),
    think("I have successfully extracted and verified the advertising expense ($714.3 million) from section 8.81. Now, I need to formally "
          "verify the total revenue for 2015 to serve as the denominator. I will read section 8.60 to extract the exact revenue amount "
          "for the year ended December 31, 2015.")
    + tool_call("read", {"section_ids": ["8.60"], "goal": "Extract the revenue amount for 2015"}),
    think("Both values are verified: advertising expense $714.3 million and revenues $6,779,511 thousand. 714.3 / 6,779.511 = 0.10536.")
    + "Netflix's advertising expense for fiscal 2015 was **$714.3 million** [8.81], and its total revenue for the same year was "
      "**$6,779,511 thousand** (i.e., **$6,779.511 million**) [8.60].\n"
      "Advertising-to-sales ratio = 714.3 / 6,779.511 = 0.10536.\n"
      "Rounded to three decimal places, the ratio is **0.105** (or 10.5%).",
]

NETFLIX_SUMMARIES = [
    "The advertising expense amount for 2015 is $714.3 million, as stated in the marketing expense discussion.",
    "The revenue amount for 2015 is $6,779,511, as explicitly stated in the 'Revenues' row of the 'CONSOLIDATED STATEMENTS OF OPERATIONS' "
    "table for the year ended December 31, 2015. This value is presented in thousands, as indicated by the caption.",
]


def explore_step(intent, name, args):
    return "<intent>\n" + intent + "\n</intent>\n" + tool_call(name, args)


def corpus_bundle():
    netflix_explorer = [
        explore_step("Find narrative text that quantifies marketing or advertising spend.", "search", {"keywords": ["advertising"]}),
        explore_step("Read the marketing note that reports advertising expenses by year.", "read",
                     {"section_ids": ["8.81"], "goal": "Extract advertising expenses for 2013-2015 and how they are defined"}),
        explore_step("Read the consolidated statements of operations for the matching revenue figures.", "read",
                     {"section_ids": ["8.60"], "goal": "Extract revenues for 2013-2015 and the unit caption"}),
        "I have enough grounded evidence for a cross-section ratio question.",
    ]
    netflix_summaries = [
        "Advertising expenses were $714.3 million (2015), $533.1 million (2014) and $404.0 million (2013).",
        "Revenues were $6,779,511, $5,504,656 and $4,374,562 thousand for 2015, 2014 and 2013 (in thousands).",
        "The advertising expense amount for 2015 is $714.3 million.",
    ]
    netflix_synth = json.dumps({
        "question": "What was the ratio of advertising expense to revenues for the streaming company in fiscal 2015, rounded to three decimal places?",
        "answer": "0.105",
    })
    netflix_teacher = [
        think("Marketing was $824,092 thousand in 2015; use it as a proxy.") + "The ratio is approximately 0.122.",
        think("Search for advertising expense first.") + tool_call("search", {"keywords": ["advertising"]}),
        think("Read the marketing note.") + tool_call("read", {"section_ids": ["8.81"], "goal": "Extract the advertising expense amount for 2015"}),
        think("714.3 / 6,779.511 = 0.10536.") + "The ratio is **0.105** (or 10.5%).",
    ]

    green_explorer = [
        explore_step("Locate charts and their captions about renewable electricity.", "search", {"keywords": ["Figure"]}),
        explore_step("Read the chart section to get the plotted renewable share values.", "read",
                     {"section_ids": ["2.36"], "goal": "Extract the caption, axis units and the 2023 value plotted in the renewable electricity chart"}),
        explore_step("Find the table that lists interim targets.", "search", {"keywords": ["interim"]}),
        explore_step("Read the targets table for the 2023 interim target.", "read",
                     {"section_ids": ["2.37"], "goal": "Extract the interim renewable electricity target for each year"}),
        explore_step("Read the narrative rule for comparing reported share with targets.", "read",
                     {"section_ids": ["2.43"], "goal": "Extract how performance against interim targets is measured"}),
        "The evidence spans a chart, a table and a narrative rule across three pages.",
    ]
    green_summaries = [
        "The chart (Figure 1) plots renewable electricity share in percent; the 2023 bar reads 29.92%.",
        "Table 1 lists interim targets: 2021 10%, 2023 15%, 2025 25%, 2030 50%.",
        "Performance is measured by comparing the dashboard renewable share with the interim target for the same year.",
    ]
    green_synth = json.dumps({
        "question": "By how many percentage points did the renewable share of electricity plotted for 2023 exceed the interim target listed for that year?",
        "answer": "14.92%",
    })
    green_teacher = [
        think("The chart shows 29.92% for 2023 and the target table lists 15%.") + "The share exceeded the target by 14.92 percentage points, i.e. **14.92%**.",
    ]

    lease_explorer = []
    terms = ["rent", "term", "deposit", "premises", "insurance", "assignment", "default", "renewal",
             "maintenance", "use", "landlord", "tenant", "schedule", "notice", "anniversary", "square feet"]
    for t in terms:
        lease_explorer.append(explore_step("Collect clauses mentioning %s." % t, "search", {"keywords": [t]}))
    lease_synth = [
        json.dumps({"question": "What is the monthly base rent shown in Table 3 of the lease?", "answer": "$31,250"}),
        json.dumps({"question": "What is the base rent? And when does the term end?", "answer": "$31,250; February 28, 2027"}),
    ]

    def ordered(responses):
        return {"strictness": "ordered", "responses": responses}

    return {
        "documents": {
            "netflix10k": {
                "explorer": ordered(netflix_explorer),
                "synthesizer": ordered([netflix_synth]),
                "teacher": ordered(netflix_teacher),
                "judge": ordered(["INCORRECT", "CORRECT"]),
                "summarizer": ordered(netflix_summaries),
            },
            "greenfield_report": {
                "explorer": ordered(green_explorer),
                "synthesizer": ordered([green_synth]),
                "teacher": ordered(green_teacher),
                "judge": ordered(["CORRECT"]),
                "summarizer": ordered(green_summaries),
            },
            "lease_agreement": {
                "explorer": ordered(lease_explorer),
                "synthesizer": ordered(lease_synth),
                "teacher": ordered([]),
                "judge": ordered([]),
                "summarizer": ordered([]),
            },
        },
        "expected": {
            "documents": 3,
            "explored": 3,
            "synthesized": 3,
            "validated": 2,
            "accepted": 2,
            "accepted_attempts": {"netflix10k": 2, "greenfield_report": 1},
            "exploration_depths": {"netflix10k": 3, "greenfield_report": 5, "lease_agreement": 15},
        },
    }


def write_json(name, obj, indent=1):
    path = os.path.join(ROOT, name)
    os.makedirs(os.path.dirname(path), exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(obj, f, indent=indent, ensure_ascii=False)
        f.write("\n")


def main():
    for builder in (netflix(), greenfield(), lease()):
        write_json("docs/%s.mineru.json" % builder.doc_id, builder.layout(), indent=None)
    write_json("scenarios/netflix_policy.json", {"strictness": "ordered", "responses": NETFLIX_POLICY})
    write_json("scenarios/netflix_summarizer.json", {"strictness": "ordered", "responses": NETFLIX_SUMMARIES})
    write_json("scenarios/netflix_question.json", {"question": NETFLIX_Q, "answer": "0.105"})
    write_json("scenarios/corpus_bundle.json", corpus_bundle())
    write_json("corpus/manifest.json", [
        {"path": "../docs/netflix10k.mineru.json", "source_tag": "longdocurl"},
        {"path": "../docs/greenfield_report.mineru.json", "source_tag": "mmdocrag"},
        {"path": "../docs/lease_agreement.mineru.json", "source_tag": "dude"},
    ])


if __name__ == "__main__":
    main()
