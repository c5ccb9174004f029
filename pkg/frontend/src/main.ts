// Browser bootstrap: wires the controller to the DOM with one render
// function and event delegation. Base URL and token live in
// localStorage so the console can point at any conforming server.

import { ConsoleApi } from './api.js';
import { QueueController } from './controller.js';
import { renderApp } from './render.js';

const BASE_URL_KEY = 'creditguard.baseUrl';
const TOKEN_KEY = 'creditguard.token';

function settings(): { baseUrl: string; token?: string } {
  return {
    baseUrl: localStorage.getItem(BASE_URL_KEY) ?? 'http://127.0.0.1:8570',
    token: localStorage.getItem(TOKEN_KEY) ?? undefined,
  };
}

export function mount(root: HTMLElement): QueueController {
  const api = new ConsoleApi(settings());
  const controller = new QueueController(api, () => {
    root.innerHTML = renderApp(controller.state);
  });

  root.addEventListener('click', (event) => {
    const target = (event.target as HTMLElement).closest<HTMLElement>('[data-action]');
    if (!target) return;
    const action = target.dataset['action'];
    if (action === 'tab') {
      void controller.switchTab(target.dataset['tab'] as 'pending' | 'resolved');
    } else if (action === 'retry') {
      void controller.load();
    } else if (action === 'select') {
      void controller.select(target.dataset['flag']!);
    } else if (action === 'dismiss-notice') {
      controller.dismissNotice();
    } else if (action === 'resolve') {
      const note = root.querySelector<HTMLInputElement>('#note')?.value ?? '';
      void controller.submitResolution(
        target.dataset['flag']!,
        target.dataset['verdict'] as 'confirmed_good' | 'confirmed_bad',
        note,
      );
    }
  });

  void controller.load();
  return controller;
}

const rootElement = typeof document !== 'undefined' ? document.getElementById('app') : null;
if (rootElement) {
  const form = document.getElementById('settings') as HTMLFormElement | null;
  if (form) {
    const urlInput = form.querySelector<HTMLInputElement>('#base-url')!;
    const tokenInput = form.querySelector<HTMLInputElement>('#token')!;
    urlInput.value = settings().baseUrl;
    tokenInput.value = settings().token ?? '';
    form.addEventListener('submit', (event) => {
      event.preventDefault();
      localStorage.setItem(BASE_URL_KEY, urlInput.value);
      if (tokenInput.value) localStorage.setItem(TOKEN_KEY, tokenInput.value);
      else localStorage.removeItem(TOKEN_KEY);
      location.reload();
    });
  }
  mount(rootElement);
}
