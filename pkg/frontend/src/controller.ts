// Queue state and transitions. The controller owns everything the views
// render: the flag list for the active tab, the selected flag, the
// account panel, and the error/notice banners. Mutations are optimistic
// and always reconciled against the server's response; on conflict the
// server state wins.

import { ApiConflict, ApiUnreachable, ConsoleApi } from './api.js';
import type { AccountView, FlagStatus, FlagView } from './types.js';

export type Tab = 'pending' | 'resolved';

export interface ConsoleState {
  tab: Tab;
  flags: FlagView[];
  selectedId: string | null;
  lastResolved: FlagView | null; // kept visible after its row leaves the pending tab
  account: AccountView | null;
  loading: boolean;
  error: string | null; // unreachable/unexpected failures; shown with a retry button
  notice: string | null; // non-destructive notices (conflicts)
}

export class QueueController {
  readonly state: ConsoleState = {
    tab: 'pending',
    flags: [],
    selectedId: null,
    lastResolved: null,
    account: null,
    loading: false,
    error: null,
    notice: null,
  };

  private onChange: () => void;

  constructor(private api: ConsoleApi, onChange?: () => void) {
    this.onChange = onChange ?? (() => undefined);
  }

  get selected(): FlagView | null {
    return this.state.flags.find((f) => f.flag_id === this.state.selectedId) ?? null;
  }

  private emit(): void {
    this.onChange();
  }

  async load(): Promise<void> {
    this.state.loading = true;
    this.state.error = null;
    this.emit();
    try {
      const flags =
        this.state.tab === 'pending'
          ? await this.api.listFlags('pending')
          : (await this.api.listFlags()).filter((f) => f.status !== 'pending');
      this.state.flags = flags; // server order: newest first
      if (this.state.selectedId && !flags.some((f) => f.flag_id === this.state.selectedId)) {
        this.state.selectedId = null;
      }
    } catch (failure) {
      this.state.error =
        failure instanceof ApiUnreachable
          ? failure.message
          : `failed to load the queue: ${(failure as Error).message}`;
    } finally {
      this.state.loading = false;
      this.emit();
    }
  }

  async switchTab(tab: Tab): Promise<void> {
    this.state.tab = tab;
    this.state.selectedId = null;
    this.state.lastResolved = null;
    this.state.account = null;
    await this.load();
  }

  async select(flagId: string): Promise<void> {
    this.state.selectedId = flagId;
    this.state.lastResolved = null;
    this.state.notice = null;
    this.emit();
    await this.showAccount(this.selected?.account_id ?? null);
  }

  private async showAccount(accountId: string | null): Promise<void> {
    if (accountId === null) {
      this.state.account = null;
      this.emit();
      return;
    }
    try {
      this.state.account = await this.api.getAccount(accountId);
    } catch {
      this.state.account = null; // panel is optional detail; queue errors stay primary
    }
    this.emit();
  }

  async submitResolution(flagId: string, verdict: FlagStatus, note: string): Promise<void> {
    const flag = this.state.flags.find((f) => f.flag_id === flagId);
    if (!flag || verdict === 'pending') return;
    const before = flag.status;
    flag.status = verdict; // optimistic; reconciled below
    this.state.notice = null;
    this.emit();
    try {
      const confirmed = await this.api.resolveFlag(flagId, verdict, note);
      this.replaceFlag(confirmed);
      this.state.lastResolved = confirmed;
      await this.showAccount(confirmed.account_id);
    } catch (failure) {
      flag.status = before;
      if (failure instanceof ApiConflict) {
        // the server already has a verdict: show it, keep everything else
        this.state.notice = `flag ${flagId} was already resolved; showing the server's state`;
        await this.load();
      } else if (failure instanceof ApiUnreachable) {
        this.state.error = failure.message;
      } else {
        this.state.error = `resolution failed: ${(failure as Error).message}`;
      }
      await this.showAccount(flag.account_id);
    }
    this.emit();
  }

  private replaceFlag(confirmed: FlagView): void {
    const index = this.state.flags.findIndex((f) => f.flag_id === confirmed.flag_id);
    if (index >= 0) {
      if (this.state.tab === 'pending' && confirmed.status !== 'pending') {
        this.state.flags.splice(index, 1); // row moves to the resolved tab
        if (this.state.selectedId === confirmed.flag_id) this.state.selectedId = null;
      } else {
        this.state.flags[index] = confirmed;
      }
    }
  }

  dismissNotice(): void {
    this.state.notice = null;
    this.emit();
  }
}
