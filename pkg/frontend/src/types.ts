// Wire types served by the risk engine's HTTP API. The console renders
// these verbatim; it never computes risk numbers of its own.

export type FlagStatus = 'pending' | 'confirmed_bad' | 'confirmed_good';

export interface Reason {
  code: 'threshold_exceeded' | 'gap_positive' | 'spike_positive' | string;
  detail: string;
}

export interface FailedRule {
  id: number;
  description: string;
}

export interface Cause {
  cause: string;
  coefficient: number | null;
}

export interface TransactionSummary {
  tid: string;
  account: string;
  date: string;
  description: string;
  amount: string;
  category: string;
}

export interface FlagView {
  flag_id: string;
  account_id: string;
  tid: string;
  status: FlagStatus;
  resolution_note: string;
  resolved_at: string | null;
  timestamp: string;
  triple: [number, number, number] | null;
  display: [number, number, number] | null;
  gap: [number, number, number] | null;
  spike: [number, number, number] | null;
  reasons: Reason[];
  failed_standard_rules: FailedRule[];
  causes_y: Cause[];
  causes_x: Cause[];
  transaction: TransactionSummary | null;
}

export interface AccountStatsSummary {
  n_transactions: number;
  amount_mean: number;
  amount_sigma: number;
  daily_count_mean: number;
  daily_count_sigma: number;
  last_txn_date: string | null;
}

export interface AccountView {
  account_id: string;
  r_offline: number;
  baseline_r_offline: number;
  source: string;
  status: 'active' | 'suspended';
  updated_at: string;
  stats: AccountStatsSummary;
}

export interface ProblemDocument {
  code: string;
  message: string;
}
