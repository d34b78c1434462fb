// Itemset browser: paged table with sort toggles, optional grouping by the
// shared problem-side signature, and a pruned/raw item toggle. Problem and
// solution items render in separate columns with marker glyphs.

import { byPart, escapeHtml, itemSpan, supportPercent } from "../format.js";
import type { BrowseState } from "../state.js";
import { pageCount } from "../state.js";
import type { FciPage, FciRow } from "../types.js";

export function renderFciPanel(
  page: FciPage | null,
  browse: BrowseState,
  stale: boolean,
  sigma?: number,
): string {
  const sigmaNote = sigma === undefined ? "" : ` at σ=${sigma}`;
  if (page === null) {
    return `<section class="fcis"><h2>Closed itemsets</h2>
      <p class="empty">No filtered itemsets yet${sigmaNote}. Run the pipeline through s8.</p></section>`;
  }
  const staleNote = stale
    ? `<p class="stale-note">View is stale; <button data-action="refresh-fcis">refresh</button></p>`
    : "";
  const header = `
    <div class="browse-controls">
      ${sortButton(browse, "support", "support")}
      ${sortButton(browse, "items", "item count")}
      ${sortButton(browse, "id", "id")}
      <label><input type="checkbox" data-action="toggle-group" ${browse.group ? "checked" : ""}>
        group by problem signature</label>
      <label><input type="checkbox" data-action="toggle-raw" ${browse.showRaw ? "checked" : ""}>
        show raw items</label>
    </div>`;
  const body = browse.group ? renderGroups(page, browse) : renderRows(page.fcis ?? [], browse);
  const pages = pageCount(
    browse.group ? (page.total_groups ?? page.total) : page.total,
    browse.pageSize,
  );
  const pager = `
    <div class="pager">
      <button data-action="page-prev" ${browse.page === 0 ? "disabled" : ""}>prev</button>
      <span>page ${browse.page + 1} of ${pages}</span>
      <button data-action="page-next" ${browse.page + 1 >= pages ? "disabled" : ""}>next</button>
      <span class="total">${page.total} itemsets</span>
    </div>`;
  const empty =
    page.total === 0
      ? `<p class="empty">No itemsets survive the current filters${sigmaNote}.</p>`
      : "";
  return `<section class="fcis"><h2>Closed itemsets</h2>${staleNote}${header}${pager}${body}${empty}</section>`;
}

function sortButton(browse: BrowseState, key: "support" | "items" | "id", label: string): string {
  const active = browse.sort === key;
  const arrow = active ? (browse.dir === "desc" ? " ▼" : " ▲") : "";
  return `<button data-action="sort" data-sort="${key}" class="${active ? "active" : ""}">${label}${arrow}</button>`;
}

function renderGroups(page: FciPage, browse: BrowseState): string {
  const groups = page.groups ?? [];
  const blocks = groups.map((group) => {
    const label = group.group_key === "" ? "(no problem-side items)" : group.group_key;
    const rows = renderRows(group.fcis, browse);
    return `<details open class="group">
      <summary>${escapeHtml(label)} <span class="count">${group.fcis.length}</span></summary>
      ${rows}
    </details>`;
  });
  return blocks.join("");
}

function renderRows(rows: FciRow[], browse: BrowseState): string {
  const body = rows
    .map((row) => {
      const tokens = browse.showRaw ? row.raw_items : row.simplified_items;
      const { pb, sol } = byPart(tokens);
      const selected = browse.selection === row.fci_id ? " selected" : "";
      return `<tr class="fci-row${selected}" data-action="select-fci" data-fci="${row.fci_id}">
        <td class="num">${row.support_count}</td>
        <td class="num">${supportPercent(row.support)}</td>
        <td class="num">${row.item_count}</td>
        <td class="items">${pb.map(itemSpan).join(" ")}</td>
        <td class="items">${sol.map(itemSpan).join(" ")}</td>
        <td><button data-action="make-rule" data-fci="${row.fci_id}">to rule</button></td>
      </tr>`;
    })
    .join("");
  return `<table class="fci-table">
    <thead><tr><th>count</th><th>support</th><th>items</th>
      <th>problem side</th><th>solution side</th><th></th></tr></thead>
    <tbody>${body}</tbody>
  </table>`;
}
