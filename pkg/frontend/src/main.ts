import { ApiClient } from './api';
import { findRoute, homeFor } from './router';
import { renderLogin, renderScreen, el } from './views';

/**
 * Portal shell: owns the ApiClient, the hash router, and the mount point.
 * Exported as a class so tests can boot it against a mock API and a jsdom
 * window instead of wiring module-level singletons.
 */
export class App {
  readonly api: ApiClient;

  constructor(
    private readonly mount: HTMLElement,
    apiBaseUrl = '',
    private readonly win: Window = window,
    api?: ApiClient,
  ) {
    this.api = api ?? new ApiClient(apiBaseUrl);
    this.win.addEventListener('hashchange', () => void this.render());
  }

  start(): Promise<void> {
    return this.render();
  }

  navigate(path: string): Promise<void> {
    this.win.location.hash = path;
    return this.render(); // jsdom doesn't always fire hashchange synchronously
  }

  async render(): Promise<void> {
    const session = this.api.session;
    if (!session) {
      this.mount.replaceChildren(
        renderLogin(this.api, (home) => void this.navigate(home)),
      );
      return;
    }
    const route = findRoute(this.win.location.hash) ?? findRoute(homeFor(session.role))!;
    if (route.portal !== session.role) {
      // deep link into another portal: bounce to our own home; the API would
      // refuse the data anyway, this just keeps navigation coherent
      await this.navigate(homeFor(session.role));
      return;
    }
    const screen = await renderScreen(route, {
      api: this.api,
      navigate: (path) => void this.navigate(path),
    });
    const logoutButton = el('button', { class: 'logout' }, ['Log out']);
    logoutButton.addEventListener('click', () => {
      void this.api.logout().then(() => this.render());
    });
    this.mount.replaceChildren(
      el('header', {}, [
        el('span', { class: 'whoami' }, [`${session.full_name} (${session.role})`]),
        logoutButton,
      ]),
      screen,
    );
  }
}

declare global {
  interface Window {
    CITADEL_API_BASE?: string;
  }
}

if (typeof document !== 'undefined' && document.getElementById('app')) {
  const app = new App(document.getElementById('app')!, window.CITADEL_API_BASE ?? '');
  void app.start();
}
