// HTML renderers: pure functions from state to markup. Numbers shown
// here come straight off the wire; the only transformation is decimal
// formatting.

import type { ConsoleState } from './controller.js';
import type { AccountView, Cause, FlagView } from './types.js';

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;');
}

function fixed1(value: number): string {
  return value.toFixed(1);
}

export function overallDisplay(flag: FlagView): string {
  if (flag.display) return fixed1(flag.display[2]);
  if (flag.triple) return fixed1(flag.triple[2]);
  return 'n/a';
}

function statusBadge(status: string): string {
  return `<span class="badge badge-${status}">${status.replace('_', ' ')}</span>`;
}

export function renderBanners(state: ConsoleState): string {
  const parts: string[] = [];
  if (state.error) {
    parts.push(
      `<div class="banner banner-error" data-testid="error-banner">` +
        `${escapeHtml(state.error)} <button data-action="retry">retry</button></div>`,
    );
  }
  if (state.notice) {
    parts.push(
      `<div class="banner banner-notice" data-testid="conflict-notice">` +
        `${escapeHtml(state.notice)} <button data-action="dismiss-notice">dismiss</button></div>`,
    );
  }
  return parts.join('');
}

export function renderQueue(state: ConsoleState): string {
  if (state.loading) return '<p class="muted">loading…</p>';
  if (state.error && state.flags.length === 0) return ''; // the banner carries the failure
  if (state.flags.length === 0) {
    return `<p class="muted" data-testid="empty-state">no ${state.tab} flags</p>`;
  }
  const rows = state.flags
    .map((flag) => {
      const selected = flag.flag_id === state.selectedId ? ' selected' : '';
      const reasons = flag.reasons.map((r) => `<code>${escapeHtml(r.code)}</code>`).join(' ');
      return (
        `<tr class="flag-row${selected}" data-action="select" data-flag="${flag.flag_id}" ` +
        `data-testid="flag-row-${flag.flag_id}">` +
        `<td>${flag.flag_id}</td>` +
        `<td>${escapeHtml(flag.account_id)}</td>` +
        `<td class="risk" data-testid="overall-${flag.flag_id}">${overallDisplay(flag)}%</td>` +
        `<td>${reasons}</td>` +
        `<td>${statusBadge(flag.status)}</td>` +
        `<td class="muted">${escapeHtml(flag.timestamp)}</td>` +
        `</tr>`
      );
    })
    .join('');
  return (
    '<table class="queue"><thead><tr>' +
    '<th>flag</th><th>account</th><th>overall risk</th><th>reasons</th>' +
    '<th>status</th><th>scored at</th>' +
    `</tr></thead><tbody>${rows}</tbody></table>`
  );
}

function causeList(causes: Cause[], validated: Set<string>): string {
  if (causes.length === 0) return '<li class="muted">none</li>';
  return causes
    .map((c) => {
      const mark = validated.has(c.cause) ? ' <strong>(validated)</strong>' : '';
      const coeff = c.coefficient === null ? '' : ` ×${c.coefficient}`;
      return `<li>${escapeHtml(c.cause)}${coeff}${mark}</li>`;
    })
    .join('');
}

function vector(name: string, values: [number, number, number] | null): string {
  if (!values) return `<tr><td>${name}</td><td class="muted" colspan="3">no history</td></tr>`;
  return (
    `<tr><td>${name}</td>` +
    values.map((v) => `<td>${v >= 0 ? '+' : ''}${fixed1(v)}</td>`).join('') +
    '</tr>'
  );
}

export function renderDetail(state: ConsoleState): string {
  const flag = state.flags.find((f) => f.flag_id === state.selectedId) ?? state.lastResolved;
  if (!flag) return '<p class="muted">select a flag to inspect it</p>';
  const validated = new Set(flag.causes_x.map((c) => c.cause));
  const txn = flag.transaction;
  const triple = flag.display ?? flag.triple;
  const tripleRow = triple
    ? `<tr><td>risk</td><td>${fixed1(triple[0])}</td><td>${fixed1(triple[1])}</td>` +
      `<td data-testid="detail-overall">${fixed1(triple[2])}</td></tr>`
    : '';
  const failed = flag.failed_standard_rules
    .map((r) => `<li>rule ${r.id}: ${escapeHtml(r.description)}</li>`)
    .join('');
  const actions =
    flag.status === 'pending'
      ? `<div class="actions">
          <input type="text" id="note" placeholder="resolution note" />
          <button data-action="resolve" data-flag="${flag.flag_id}"
                  data-verdict="confirmed_good" data-testid="confirm-good">confirm good</button>
          <button data-action="resolve" data-flag="${flag.flag_id}"
                  data-verdict="confirmed_bad" data-testid="confirm-bad">confirm bad</button>
        </div>`
      : `<p data-testid="resolution-summary">${statusBadge(flag.status)} ` +
        `${escapeHtml(flag.resolution_note)}</p>`;
  return `
    <h2>${flag.flag_id} ${statusBadge(flag.status)}</h2>
    ${txn ? `<p class="txn">${escapeHtml(txn.date)} · $${escapeHtml(txn.amount)} · ` +
            `${escapeHtml(txn.category)}<br/><span class="muted">` +
            `${escapeHtml(txn.description)}</span></p>` : ''}
    <table class="triple">
      <thead><tr><th></th><th>online</th><th>offline</th><th>overall</th></tr></thead>
      <tbody>${tripleRow}${vector('gap', flag.gap)}${vector('spike', flag.spike)}</tbody>
    </table>
    <h3>failed rules</h3><ul>${failed || '<li class="muted">none</li>'}</ul>
    <h3>candidate causes</h3><ul data-testid="causes">${causeList(flag.causes_y, validated)}</ul>
    ${actions}`;
}

export function renderAccount(account: AccountView | null): string {
  if (!account) return '';
  return `
    <h3>account ${escapeHtml(account.account_id)}</h3>
    <dl>
      <dt>offline risk</dt>
      <dd data-testid="account-r-offline">${fixed1(account.r_offline)}%</dd>
      <dt>status</dt><dd data-testid="account-status">${statusBadge(account.status)}</dd>
      <dt>risk source</dt><dd>${escapeHtml(account.source)}</dd>
      <dt>transactions</dt><dd>${account.stats.n_transactions}</dd>
    </dl>`;
}

export function renderApp(state: ConsoleState): string {
  const tabs = (['pending', 'resolved'] as const)
    .map(
      (tab) =>
        `<button class="tab${state.tab === tab ? ' active' : ''}" ` +
        `data-action="tab" data-tab="${tab}">${tab}</button>`,
    )
    .join('');
  return `
    ${renderBanners(state)}
    <nav>${tabs}<button data-action="retry" class="refresh">refresh</button></nav>
    <main>
      <section class="queue-pane">${renderQueue(state)}</section>
      <aside class="detail-pane">${renderDetail(state)}${renderAccount(state.account)}</aside>
    </main>`;
}
