// In-memory conforming server, exposed as a fetch-compatible function.
// Seeded with the worked example: account 1 was flagged on its $237.90
// airline purchase (displayed total 67.9) and sits pending review.

import type { AccountView, FlagView } from '../src/types.js';

export interface StubState {
  flags: Map<string, FlagView>;
  accounts: Map<string, AccountView>;
  offline: boolean;
  requests: string[];
}

export function seededStub(): StubState {
  const flag: FlagView = {
    flag_id: 'F00000002',
    account_id: '1',
    tid: '1',
    status: 'pending',
    resolution_note: '',
    resolved_at: null,
    timestamp: '2017-01-20',
    triple: [66.66666666666667, 70.0, 67.66666666666667],
    display: [67.0, 70.0, 67.9],
    gap: null,
    spike: null,
    reasons: [
      { code: 'threshold_exceeded', detail: 'overall risk 67.667% above threshold 60%' },
    ],
    failed_standard_rules: [
      { id: 1, description: 'transaction amount within mean + stddev of past amounts' },
      { id: 4, description: 'minimum amount due paid' },
    ],
    causes_y: [
      { cause: 'Air ticket purchase', coefficient: 1.0 },
      { cause: 'Out of the country', coefficient: 2.0 },
    ],
    causes_x: [{ cause: 'Air ticket purchase', coefficient: 1.0 }],
    transaction: {
      tid: '1',
      account: '1',
      date: '2017-01-20',
      description: 'SOUTHWES52 68506576536 800-435-9792 TX',
      amount: '237.90',
      category: 'Airlines',
    },
  };
  const account: AccountView = {
    account_id: '1',
    r_offline: 69.53333333333333,
    baseline_r_offline: 70.0,
    source: 'feedback',
    status: 'suspended',
    updated_at: '2017-01-20',
    stats: {
      n_transactions: 4,
      amount_mean: 7822.5,
      amount_sigma: 10648.0,
      daily_count_mean: 1.0,
      daily_count_sigma: 0.0,
      last_txn_date: '2017-01-20',
    },
  };
  return {
    flags: new Map([[flag.flag_id, flag]]),
    accounts: new Map([[account.account_id, account]]),
    offline: false,
    requests: [],
  };
}

function json(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { 'Content-Type': 'application/json' },
  });
}

export function stubFetch(state: StubState) {
  return async (input: string, init?: RequestInit): Promise<Response> => {
    if (state.offline) throw new TypeError('fetch failed');
    const url = new URL(input);
    const method = init?.method ?? 'GET';
    state.requests.push(`${method} ${url.pathname}${url.search}`);

    if (method === 'GET' && url.pathname === '/v1/health') return json({ status: 'ok' });

    if (method === 'GET' && url.pathname === '/v1/flags') {
      const status = url.searchParams.get('status');
      const flags = [...state.flags.values()]
        .filter((f) => status === null || f.status === status)
        .reverse(); // newest first
      return json({ flags });
    }

    const accountMatch = url.pathname.match(/^\/v1\/accounts\/([^/]+)$/);
    if (method === 'GET' && accountMatch) {
      const account = state.accounts.get(decodeURIComponent(accountMatch[1]!));
      if (!account) return json({ code: 'unknown_account', message: 'unknown account' }, 404);
      return json(account);
    }

    const resolveMatch = url.pathname.match(/^\/v1\/flags\/([^/]+)\/resolution$/);
    if (method === 'POST' && resolveMatch) {
      const flag = state.flags.get(decodeURIComponent(resolveMatch[1]!));
      if (!flag) return json({ code: 'unknown_flag', message: 'unknown flag' }, 404);
      if (flag.status !== 'pending') {
        return json(
          { code: 'flag_already_resolved', message: `already resolved to ${flag.status}` },
          409,
        );
      }
      const body = JSON.parse(String(init?.body ?? '{}')) as {
        verdict: 'confirmed_bad' | 'confirmed_good';
        note?: string;
      };
      flag.status = body.verdict;
      flag.resolution_note = body.note ?? '';
      flag.resolved_at = '2017-01-21';
      const account = state.accounts.get(flag.account_id)!;
      if (body.verdict === 'confirmed_good') {
        account.r_offline = account.baseline_r_offline;
        account.status = 'active';
      } else {
        account.r_offline = Math.max(account.r_offline, 95.0);
        account.status = 'suspended';
      }
      account.source = 'manual';
      return json(flag);
    }

    return json({ code: 'not_found', message: `no route for ${url.pathname}` }, 404);
  };
}
