export * from './types';
export * from './state';
export * from './grdx';
export * from './api';
export * from './choropleth';
export * from './compare';
export * from './cards';
